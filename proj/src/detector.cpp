#include "avp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avp/errors.hpp"

namespace avp {

void DetectorConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("detection threshold must lie in [0, 1]");
    }
    if (model == nullptr) {
        throw std::invalid_argument("detector needs a trained model");
    }
}

Verdict detect(const DetectorConfig& config, std::span<const double> sample) {
    config.validate();
    Verdict v;
    v.score = predict_proba(*config.model, sample);
    v.abnormal = v.score > config.threshold;
    return v;
}

std::vector<double> score_all(const TrainedModel& model, const FeatureMatrix& matrix) {
    std::vector<double> scores;
    scores.reserve(matrix.n_rows);
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        scores.push_back(predict_proba(model, matrix.row(i)));
    }
    return scores;
}

namespace {

ScoreDistribution histogram(Label cls, std::span<const double> scores, std::size_t bins) {
    ScoreDistribution dist;
    dist.cls = cls;
    dist.total = scores.size();
    dist.counts.assign(bins, 0);
    dist.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        dist.bin_edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    }
    for (double s : scores) {
        auto bin = static_cast<std::size_t>(s * static_cast<double>(bins));
        if (bin >= bins) bin = bins - 1;  // score of exactly 1.0
        ++dist.counts[bin];
    }
    return dist;
}

} // namespace

std::pair<ScoreDistribution, ScoreDistribution>
score_distribution(const TrainedModel& model, const FeatureMatrix& matrix, std::size_t bins) {
    if (bins < 1) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    std::vector<double> normal_scores, abnormal_scores;
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        double score = predict_proba(model, matrix.row(i));
        (matrix.labels[i] == 1 ? abnormal_scores : normal_scores).push_back(score);
    }
    return {histogram(Label::normal, normal_scores, bins),
            histogram(Label::abnormal, abnormal_scores, bins)};
}

MarginReport margin_analysis(std::span<const double> normal_scores,
                             std::span<const double> attack_scores, Margin margin) {
    if (normal_scores.empty() || attack_scores.empty()) {
        throw DataError("margin analysis needs scores for both classes");
    }
    if (!(margin.lo <= margin.hi)) {
        throw std::invalid_argument("margin lower bound exceeds upper bound");
    }
    for (double s : normal_scores) {
        if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("scores must lie in [0, 1]");
    }
    for (double s : attack_scores) {
        if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("scores must lie in [0, 1]");
    }

    // Sorted copies; the counts fall out of partition points.
    std::vector<double> normals(normal_scores.begin(), normal_scores.end());
    std::vector<double> attacks(attack_scores.begin(), attack_scores.end());
    std::sort(normals.begin(), normals.end());
    std::sort(attacks.begin(), attacks.end());

    MarginReport report;
    report.margin = margin;
    report.normal_misclassified = static_cast<std::size_t>(
        normals.end() - std::upper_bound(normals.begin(), normals.end(), margin.lo));
    report.attack_misclassified = static_cast<std::size_t>(
        std::lower_bound(attacks.begin(), attacks.end(), margin.hi) - attacks.begin());
    report.fp_rate = static_cast<double>(report.normal_misclassified) /
                     static_cast<double>(normals.size());
    report.fn_rate = static_cast<double>(report.attack_misclassified) /
                     static_cast<double>(attacks.size());
    return report;
}

std::vector<Margin> default_margins() {
    return {{0.4, 0.5}, {0.3, 0.5}, {0.4, 0.6}, {0.3, 0.6}};
}

TuneResult tune_threshold(std::span<const double> normal_scores,
                          std::span<const double> attack_scores,
                          std::span<const Margin> candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("threshold tuning needs at least one candidate margin");
    }
    TuneResult result;
    for (const Margin& m : candidates) {
        result.ranked.push_back(margin_analysis(normal_scores, attack_scores, m));
    }
    std::stable_sort(result.ranked.begin(), result.ranked.end(),
                     [](const MarginReport& a, const MarginReport& b) {
                         if (a.fn_rate != b.fn_rate) return a.fn_rate < b.fn_rate;
                         return a.fp_rate < b.fp_rate;
                     });
    result.winner = result.ranked.front();
    return result;
}

TuneResult tune_threshold(std::span<const double> normal_scores,
                          std::span<const double> attack_scores) {
    auto margins = default_margins();
    return tune_threshold(normal_scores, attack_scores, margins);
}

} // namespace avp
