#pragma once

#include <span>
#include <utility>
#include <vector>

#include "avp/classifiers.hpp"

namespace avp {

// Thresholded anomaly detector: a trained scorer plus the alarm threshold.
struct DetectorConfig {
    double threshold = 0.5;  // in [0, 1]
    const TrainedModel* model = nullptr;

    void validate() const;
};

struct Verdict {
    double score = 0.0;
    bool abnormal = false;  // true iff score > threshold, strictly
};

Verdict detect(const DetectorConfig& config, std::span<const double> sample);

// Equal-width histogram of scores over [0, 1] for one class.
struct ScoreDistribution {
    Label cls = Label::unlabeled;
    std::size_t total = 0;
    std::vector<double> bin_edges;   // bins + 1 edges
    std::vector<std::size_t> counts; // bins entries
};

// Scores every row and histograms the two classes separately. Scores of 1.0
// land in the last bin. Rejects bins < 1 and unlabeled input.
std::pair<ScoreDistribution, ScoreDistribution>
score_distribution(const TrainedModel& model, const FeatureMatrix& matrix, std::size_t bins);

std::vector<double> score_all(const TrainedModel& model, const FeatureMatrix& matrix);

struct Margin {
    double lo = 0.0;
    double hi = 0.0;
};

// Worst-case misclassification over any threshold placed inside the margin:
// normals scoring above lo are potential false positives, attacks scoring
// below hi potential false negatives.
struct MarginReport {
    Margin margin;
    std::size_t normal_misclassified = 0;
    std::size_t attack_misclassified = 0;
    double fp_rate = 0.0;
    double fn_rate = 0.0;
};

// Rejects empty class arrays (rates undefined) and lo > hi.
MarginReport margin_analysis(std::span<const double> normal_scores,
                             std::span<const double> attack_scores, Margin margin);

// The four default candidate margins for threshold placement.
std::vector<Margin> default_margins();

struct TuneResult {
    std::vector<MarginReport> ranked;  // best first
    MarginReport winner;
};

// Evaluates every candidate margin and ranks by (fn_rate, fp_rate) ascending;
// ties keep the candidate order.
TuneResult tune_threshold(std::span<const double> normal_scores,
                          std::span<const double> attack_scores,
                          std::span<const Margin> candidates);
TuneResult tune_threshold(std::span<const double> normal_scores,
                          std::span<const double> attack_scores);

} // namespace avp
