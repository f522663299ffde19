#include "avp/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avp/config.hpp"
#include "avp/errors.hpp"

namespace avp {

ResidualSeries compute_residuals(std::span<const TelemetryFrame> frames, const StateSpace& ss) {
    ResidualSeries series;
    if (frames.size() < 2) return series;
    series.e_vy.reserve(frames.size() - 1);
    series.e_r.reserve(frames.size() - 1);
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        double dt = frames[i + 1].t - frames[i].t;
        if (!(dt > 0.0)) {
            throw DataError("non-increasing timestamps at frame " + std::to_string(i + 1));
        }
        LateralState current{frames[i].lateral_speed, frames[i].yaw_rate};
        ControlInput u{frames[i].steering_angle, 0.0};
        LateralState predicted = predict_next_state(ss, current, u, dt);
        series.e_vy.push_back(frames[i + 1].lateral_speed - predicted.vy);
        series.e_r.push_back(frames[i + 1].yaw_rate - predicted.r);
    }
    return series;
}

ResidualSeries compute_residuals(std::span<const TelemetryFrame> frames, const VehicleParams& params) {
    return compute_residuals(frames, system_matrices(params));
}

void FeaturizerConfig::validate() const {
    if (window < 1) {
        throw std::invalid_argument("featurizer window must be at least 1");
    }
    if (!include_raw && !include_residuals) {
        throw std::invalid_argument("featurizer must include raw channels or residuals");
    }
}

namespace {

struct Rolling {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

Rolling rolling_stats(const std::vector<double>& series, std::size_t end_inclusive, std::size_t window) {
    std::size_t begin = end_inclusive + 1 >= window ? end_inclusive + 1 - window : 0;
    std::size_t n = end_inclusive - begin + 1;
    double sum = 0.0;
    for (std::size_t i = begin; i <= end_inclusive; ++i) sum += series[i];
    double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = begin; i <= end_inclusive; ++i) {
        double d = series[i] - mean;
        sq += d * d;
    }
    return {mean, std::sqrt(sq / static_cast<double>(n))};
}

} // namespace

FeatureMatrix build_features(std::span<const TelemetryFrame> frames,
                             const VehicleParams& params,
                             const FeaturizerConfig& config) {
    config.validate();
    if (frames.size() < 2) {
        throw DataError("featurization needs at least two frames");
    }

    ResidualSeries residuals;
    if (config.include_residuals) {
        residuals = compute_residuals(frames, params);
    } else {
        // Still validates the time ordering.
        for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
            if (!(frames[i + 1].t - frames[i].t > 0.0)) {
                throw DataError("non-increasing timestamps at frame " + std::to_string(i + 1));
            }
        }
    }

    FeatureMatrix matrix;
    if (config.include_raw) {
        if (config.include_arm) matrix.names.push_back("arm");
        for (const char* name : {"desired_speed", "longitudinal_speed", "lateral_speed",
                                 "measured_speed", "obstacle_distance", "steering_angle",
                                 "yaw_angle", "yaw_rate", "throttle"}) {
            matrix.names.push_back(name);
        }
    }
    if (config.include_residuals) {
        for (const char* name : {"residual_vy", "residual_r", "residual_vy_mean", "residual_vy_std",
                                 "residual_r_mean", "residual_r_std"}) {
            matrix.names.push_back(name);
        }
    }
    matrix.n_cols = matrix.names.size();
    matrix.n_rows = frames.size() - 1;
    matrix.values.reserve(matrix.n_rows * matrix.n_cols);
    matrix.labels.reserve(matrix.n_rows);

    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        const TelemetryFrame& frame = frames[i + 1];
        if (frame.label == Label::unlabeled && !config.allow_unlabeled) {
            throw DataError("unlabeled frame at t = " + std::to_string(frame.t));
        }
        if (config.include_raw) {
            if (config.include_arm) matrix.values.push_back(frame.arm ? 1.0 : 0.0);
            matrix.values.push_back(frame.desired_speed);
            matrix.values.push_back(frame.longitudinal_speed);
            matrix.values.push_back(frame.lateral_speed);
            matrix.values.push_back(frame.measured_speed);
            matrix.values.push_back(frame.obstacle_distance);
            matrix.values.push_back(frame.steering_angle);
            matrix.values.push_back(frame.yaw_angle);
            matrix.values.push_back(frame.yaw_rate);
            matrix.values.push_back(frame.throttle);
        }
        if (config.include_residuals) {
            Rolling vy = rolling_stats(residuals.e_vy, i, config.window);
            Rolling r = rolling_stats(residuals.e_r, i, config.window);
            matrix.values.push_back(residuals.e_vy[i]);
            matrix.values.push_back(residuals.e_r[i]);
            matrix.values.push_back(vy.mean);
            matrix.values.push_back(vy.stddev);
            matrix.values.push_back(r.mean);
            matrix.values.push_back(r.stddev);
        }
        matrix.labels.push_back(frame.label == Label::abnormal ? 1 : 0);
    }

    for (double v : matrix.values) {
        if (!std::isfinite(v)) {
            throw NumericError("feature matrix contains a non-finite value");
        }
    }
    return matrix;
}

FeatureStats fit_feature_stats(const FeatureMatrix& matrix) {
    FeatureStats stats;
    stats.mean.assign(matrix.n_cols, 0.0);
    stats.stddev.assign(matrix.n_cols, 0.0);
    if (matrix.n_rows == 0) return stats;
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        for (std::size_t j = 0; j < matrix.n_cols; ++j) {
            stats.mean[j] += matrix.at(i, j);
        }
    }
    for (auto& m : stats.mean) m /= static_cast<double>(matrix.n_rows);
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        for (std::size_t j = 0; j < matrix.n_cols; ++j) {
            double d = matrix.at(i, j) - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    }
    for (auto& s : stats.stddev) {
        s = std::sqrt(s / static_cast<double>(matrix.n_rows));
    }
    return stats;
}

std::pair<FeatureMatrix, FeatureStats> standardize(FeatureMatrix matrix,
                                                   const std::optional<FeatureStats>& stats) {
    FeatureStats used = stats.has_value() ? *stats : fit_feature_stats(matrix);
    if (used.mean.size() != matrix.n_cols) {
        throw std::invalid_argument("feature stats dimensionality does not match the matrix");
    }
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        for (std::size_t j = 0; j < matrix.n_cols; ++j) {
            if (used.stddev[j] > 0.0) {
                matrix.at(i, j) = (matrix.at(i, j) - used.mean[j]) / used.stddev[j];
            }
        }
    }
    return {std::move(matrix), std::move(used)};
}

namespace {

void format_double(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += buf;
}

} // namespace

void write_feature_matrix(const std::string& path, const FeatureMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write feature matrix: " + path);
    }
    std::string buf;
    for (const auto& name : matrix.names) {
        buf += name;
        buf += ',';
    }
    buf += "label\n";
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        for (std::size_t j = 0; j < matrix.n_cols; ++j) {
            format_double(buf, matrix.at(i, j));
            buf += ',';
        }
        buf += matrix.labels[i] ? '1' : '0';
        buf += '\n';
    }
    out << buf;
}

FeatureMatrix load_feature_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open feature matrix: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    FeatureMatrix matrix;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) matrix.names.push_back(cell);
    }
    if (matrix.names.empty() || matrix.names.back() != "label") {
        throw DataError(path + ": expected a trailing 'label' column");
    }
    matrix.names.pop_back();
    matrix.n_cols = matrix.names.size();

    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) { ++row; continue; }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream cells(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(cells, cell, ',')) {
            const char* begin = cell.c_str();
            char* end = nullptr;
            double value = std::strtod(begin, &end);
            if (end == begin || *end != '\0') {
                throw DataError(path + ": row " + std::to_string(row) + ": bad numeric '" + cell + "'");
            }
            if (col < matrix.n_cols) {
                if (!std::isfinite(value)) {
                    throw DataError(path + ": row " + std::to_string(row) + ": non-finite feature value");
                }
                matrix.values.push_back(value);
            } else {
                matrix.labels.push_back(value != 0.0 ? 1 : 0);
            }
            ++col;
        }
        if (col != matrix.n_cols + 1) {
            throw DataError(path + ": row " + std::to_string(row) + " has " + std::to_string(col) +
                            " fields, expected " + std::to_string(matrix.n_cols + 1));
        }
        ++row;
        ++matrix.n_rows;
    }
    return matrix;
}

void write_featurizer_sidecar(const std::string& path, const FeaturizerConfig& config,
                              const std::string& params_source) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write featurizer sidecar: " + path);
    }
    out << "window = " << config.window << "\n"
        << "include_raw = " << (config.include_raw ? "true" : "false") << "\n"
        << "include_residuals = " << (config.include_residuals ? "true" : "false") << "\n"
        << "include_arm = " << (config.include_arm ? "true" : "false") << "\n"
        << "params_source = " << params_source << "\n";
}

FeaturizerConfig load_featurizer_sidecar(const std::string& path, std::string* params_source) {
    KeyValueConfig cfg = parse_config_file(path);
    FeaturizerConfig config;
    config.window = static_cast<std::size_t>(cfg.get_int("window", static_cast<long long>(config.window)));
    config.include_raw = cfg.get_bool("include_raw", config.include_raw);
    config.include_residuals = cfg.get_bool("include_residuals", config.include_residuals);
    config.include_arm = cfg.get_bool("include_arm", config.include_arm);
    config.validate();
    if (params_source != nullptr) {
        *params_source = cfg.get("params_source", "");
    }
    return config;
}

} // namespace avp
