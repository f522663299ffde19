#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avp/dynamics.hpp"
#include "avp/telemetry.hpp"

namespace avp {

// Per-step prediction errors of the lateral state: e = measured - predicted,
// one entry per consecutive frame pair.
struct ResidualSeries {
    std::vector<double> e_vy;  // [m/s]
    std::vector<double> e_r;   // [rad/s]
};

// Predicts the lateral state at each frame i+1 from frame i via one Euler
// step with dt = t_{i+1} - t_i and subtracts it from the measurement.
// Rejects non-increasing timestamps.
ResidualSeries compute_residuals(std::span<const TelemetryFrame> frames, const StateSpace& ss);
ResidualSeries compute_residuals(std::span<const TelemetryFrame> frames, const VehicleParams& params);

// Numeric samples with names and binary labels (1 = abnormal).
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<double> values;  // row-major, n_rows * n_cols
    std::vector<int> labels;
    std::string provenance;

    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
    double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * n_cols + j]; }
};

struct FeaturizerConfig {
    std::size_t window = 5;        // trailing steps for rolling residual stats
    bool include_raw = true;       // the nine numeric telemetry channels
    bool include_residuals = true; // residuals + rolling mean/std
    bool include_arm = false;      // operator arm flag, off by default
    bool allow_unlabeled = false;  // map unlabeled frames to 0 instead of rejecting

    void validate() const;
};

// One sample per frame after the first (the first frame has no prediction
// target). Raw channels come from the sample's frame; residual statistics use
// the trailing window of the residual series, shortened at the start.
// Rolling std is the population form. Rejects inputs shorter than two frames
// and non-finite channel values.
FeatureMatrix build_features(std::span<const TelemetryFrame> frames,
                             const VehicleParams& params,
                             const FeaturizerConfig& config = FeaturizerConfig());

// Per-feature centering/scaling statistics (population std).
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 marks a zero-variance passthrough column
};

FeatureStats fit_feature_stats(const FeatureMatrix& matrix);

// Centers and scales each column by the given stats; zero-variance columns
// pass through unscaled. When stats are absent they are fitted on the input.
// Returns the stats used so test folds can reuse training-set statistics.
std::pair<FeatureMatrix, FeatureStats> standardize(FeatureMatrix matrix,
                                                   const std::optional<FeatureStats>& stats = std::nullopt);

// Canonical comma-separated persistence: header of feature names plus a
// trailing 0/1 label column. The sidecar is a key-value file recording the
// featurizer settings for reproduction.
void write_feature_matrix(const std::string& path, const FeatureMatrix& matrix);
FeatureMatrix load_feature_matrix(const std::string& path);
void write_featurizer_sidecar(const std::string& path, const FeaturizerConfig& config,
                              const std::string& params_source);
FeaturizerConfig load_featurizer_sidecar(const std::string& path, std::string* params_source = nullptr);

} // namespace avp
