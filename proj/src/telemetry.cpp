#include "avp/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avp/errors.hpp"
#include "avp/rng.hpp"

namespace avp {

std::string to_string(Label label) {
    switch (label) {
        case Label::normal: return "normal";
        case Label::abnormal: return "abnormal";
        default: return "unlabeled";
    }
}

Label label_from_string(const std::string& text) {
    if (text == "normal") return Label::normal;
    if (text == "abnormal") return Label::abnormal;
    if (text == "unlabeled" || text.empty()) return Label::unlabeled;
    throw DataError("unknown label value: '" + text + "'");
}

const std::vector<std::string>& telemetry_feature_names() {
    static const std::vector<std::string> names = {
        "timestamp",      "arm",           "desired_speed", "longitudinal_speed",
        "lateral_speed",  "measured_speed", "obstacle_distance", "steering_angle",
        "yaw_angle",      "yaw_rate",      "throttle",
    };
    return names;
}

ColumnMap::ColumnMap() {
    for (const auto& name : telemetry_feature_names()) columns[name] = name;
}

const std::string& ColumnMap::column_for(const std::string& feature) const {
    auto it = columns.find(feature);
    if (it == columns.end()) {
        throw DataError("column map does not resolve feature '" + feature + "'");
    }
    return it->second;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw DataError("row " + std::to_string(row) + ", column '" + column +
                        "': cannot parse '" + cell + "' as a number");
    }
    return value;
}

void format_double(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += buf;
}

} // namespace

LoadReport load_frames(const std::string& path, const ColumnMap& map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open telemetry file: " + path);
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw DataError(path + ": missing header row");
    }
    std::vector<std::string> header = split_csv_line(header_line);

    auto column_index = [&](const std::string& column) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), column);
        return it == header.end() ? header.size() : static_cast<std::size_t>(it - header.begin());
    };

    struct Slot { std::string feature; std::size_t index; };
    std::vector<Slot> slots;
    for (const auto& feature : telemetry_feature_names()) {
        const std::string& column = map.column_for(feature);
        std::size_t idx = column_index(column);
        if (idx == header.size()) {
            throw DataError(path + ": feature '" + feature + "' not found (expected column '" +
                            column + "')");
        }
        slots.push_back({feature, idx});
    }
    std::size_t label_idx = column_index("label");

    LoadReport report;
    std::string line;
    std::size_t row = 1;  // data rows are 1-based in diagnostics
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) { ++row; continue; }
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw DataError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        TelemetryFrame frame;
        for (const auto& slot : slots) {
            double value = parse_cell(cells[slot.index], row, header[slot.index]);
            if (slot.feature == "timestamp") {
                if (!std::isfinite(value) || value < 0.0) {
                    throw DataError(path + ": row " + std::to_string(row) +
                                    ": timestamp must be finite and non-negative");
                }
                frame.t = value;
            } else if (slot.feature == "arm") {
                frame.arm = value != 0.0;
            } else if (slot.feature == "desired_speed") {
                frame.desired_speed = value;
            } else if (slot.feature == "longitudinal_speed") {
                frame.longitudinal_speed = value;
            } else if (slot.feature == "lateral_speed") {
                frame.lateral_speed = value;
            } else if (slot.feature == "measured_speed") {
                frame.measured_speed = value;
            } else if (slot.feature == "obstacle_distance") {
                frame.obstacle_distance = value;
            } else if (slot.feature == "steering_angle") {
                frame.steering_angle = value;
            } else if (slot.feature == "yaw_angle") {
                frame.yaw_angle = value;
            } else if (slot.feature == "yaw_rate") {
                frame.yaw_rate = value;
            } else if (slot.feature == "throttle") {
                if (value < 0.0 || value > 100.0) {
                    throw DataError(path + ": row " + std::to_string(row) +
                                    ": throttle must lie in [0, 100]");
                }
                frame.throttle = value;
            }
        }
        if (label_idx != header.size()) {
            frame.label = label_from_string(cells[label_idx]);
        }
        report.frames.push_back(frame);
        ++row;
    }

    std::stable_sort(report.frames.begin(), report.frames.end(),
                     [](const TelemetryFrame& a, const TelemetryFrame& b) { return a.t < b.t; });

    // Duplicate timestamps: keep the first occurrence.
    std::vector<TelemetryFrame> unique;
    unique.reserve(report.frames.size());
    for (const auto& frame : report.frames) {
        if (!unique.empty() && unique.back().t == frame.t) {
            ++report.duplicate_timestamps_dropped;
            continue;
        }
        unique.push_back(frame);
    }
    if (report.duplicate_timestamps_dropped > 0) {
        report.warnings.push_back(path + ": dropped " +
                                  std::to_string(report.duplicate_timestamps_dropped) +
                                  " duplicate-timestamp rows (first kept)");
    }
    report.frames = std::move(unique);
    return report;
}

std::string frames_to_csv(std::span<const TelemetryFrame> frames) {
    std::string out;
    const auto& names = telemetry_feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        out += names[i];
        out += ',';
    }
    out += "label\n";
    for (const auto& f : frames) {
        format_double(out, f.t);
        out += ',';
        out += f.arm ? '1' : '0';
        out += ',';
        format_double(out, f.desired_speed);
        out += ',';
        format_double(out, f.longitudinal_speed);
        out += ',';
        format_double(out, f.lateral_speed);
        out += ',';
        format_double(out, f.measured_speed);
        out += ',';
        format_double(out, f.obstacle_distance);
        out += ',';
        format_double(out, f.steering_angle);
        out += ',';
        format_double(out, f.yaw_angle);
        out += ',';
        format_double(out, f.yaw_rate);
        out += ',';
        format_double(out, f.throttle);
        out += ',';
        out += to_string(f.label);
        out += '\n';
    }
    return out;
}

void write_frames(const std::string& path, std::span<const TelemetryFrame> frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write telemetry file: " + path);
    }
    out << frames_to_csv(frames);
}

std::vector<TelemetryFrame> label_by_subset(std::vector<TelemetryFrame> frames, SubsetKind kind) {
    Label label = kind == SubsetKind::normal ? Label::normal : Label::abnormal;
    for (auto& frame : frames) frame.label = label;
    return frames;
}

LaserLog load_laser_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open laser log: " + path);
    }
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw DataError(path + ": missing header row");
    }
    std::vector<std::string> header = split_csv_line(header_line);
    auto find = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(path + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    std::size_t t_idx = find("timestamp");
    std::size_t s_idx = find("laser_state");

    LaserLog log;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) { ++row; continue; }
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() < header.size()) {
            throw DataError(path + ": row " + std::to_string(row) + " is short");
        }
        LaserSample sample;
        sample.t = parse_cell(cells[t_idx], row, "timestamp");
        double state = parse_cell(cells[s_idx], row, "laser_state");
        if (state != 0.0 && state != 1.0) {
            throw DataError(path + ": row " + std::to_string(row) + ": laser_state must be 0 or 1");
        }
        sample.state = state == 1.0 ? 1 : 0;
        log.samples.push_back(sample);
        ++row;
    }
    std::stable_sort(log.samples.begin(), log.samples.end(),
                     [](const LaserSample& a, const LaserSample& b) { return a.t < b.t; });
    return log;
}

void write_laser_log(const std::string& path, const LaserLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write laser log: " + path);
    }
    std::string buf = "timestamp,laser_state\n";
    for (const auto& sample : log.samples) {
        format_double(buf, sample.t);
        buf += ',';
        buf += sample.state ? '1' : '0';
        buf += '\n';
    }
    out << buf;
}

JoinResult join_laser_log(std::vector<TelemetryFrame> frames, const LaserLog& log, double tolerance) {
    if (!(tolerance >= 0.0)) {
        throw std::invalid_argument("join tolerance must be non-negative");
    }
    JoinResult result;
    result.frames = std::move(frames);
    if (log.samples.empty()) {
        result.unmatched = result.frames.size();
    } else {
        for (auto& frame : result.frames) {
            auto it = std::lower_bound(log.samples.begin(), log.samples.end(), frame.t,
                                       [](const LaserSample& s, double t) { return s.t < t; });
            // Candidates: first entry at/after t and the one before it.
            const LaserSample* best = nullptr;
            double best_gap = 0.0;
            if (it != log.samples.end()) {
                best = &*it;
                best_gap = std::fabs(it->t - frame.t);
            }
            if (it != log.samples.begin()) {
                auto prev = std::prev(it);
                double gap = std::fabs(frame.t - prev->t);
                if (best == nullptr || gap <= best_gap) {  // earlier entry wins ties
                    best = &*prev;
                    best_gap = gap;
                }
            }
            if (best != nullptr && best_gap <= tolerance) {
                frame.label = best->state == 1 ? Label::abnormal : Label::normal;
            } else {
                ++result.unmatched;
            }
        }
    }
    result.unmatched_warning =
        !result.frames.empty() &&
        static_cast<double>(result.unmatched) > 0.01 * static_cast<double>(result.frames.size());
    return result;
}

double default_join_tolerance(std::span<const TelemetryFrame> frames) {
    if (frames.size() < 2) return 0.0;
    std::vector<double> gaps;
    gaps.reserve(frames.size() - 1);
    for (std::size_t i = 1; i < frames.size(); ++i) {
        gaps.push_back(frames[i].t - frames[i - 1].t);
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return 0.5 * gaps[gaps.size() / 2];
}

std::vector<std::vector<std::size_t>> stratified_fold_indices(const std::vector<int>& labels,
                                                              std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("stratified k-fold requires k >= 2");
    }
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 0 ? class0 : class1).push_back(i);
    }
    if (class0.empty() || class1.empty()) {
        throw DataError("stratified k-fold requires both classes present");
    }
    std::size_t minority = std::min(class0.size(), class1.size());
    if (k > minority) {
        throw DataError("k = " + std::to_string(k) + " exceeds the minority class count (" +
                        std::to_string(minority) + ")");
    }

    Rng rng(mix64(seed));
    std::vector<std::vector<std::size_t>> folds(k);
    for (auto* cls : {&class0, &class1}) {
        shuffle(*cls, rng);
        for (std::size_t j = 0; j < cls->size(); ++j) {
            folds[j % k].push_back((*cls)[j]);
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const TelemetryFrame> frames,
                                                       std::size_t k, std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(frames.size());
    for (const auto& frame : frames) {
        if (frame.label == Label::unlabeled) {
            throw DataError("stratified k-fold requires labeled frames");
        }
        labels.push_back(frame.label == Label::abnormal ? 1 : 0);
    }
    return stratified_fold_indices(labels, k, seed);
}

DatasetSummary summarize(const std::vector<std::pair<std::string, std::span<const TelemetryFrame>>>& subsets) {
    DatasetSummary summary;
    for (const auto& [name, frames] : subsets) {
        SubsetSummary s;
        s.name = name;
        s.rows = frames.size();
        for (const auto& frame : frames) {
            if (frame.label == Label::abnormal) ++s.abnormals;
            else if (frame.label == Label::normal) ++s.normals;
        }
        summary.total_rows += s.rows;
        summary.total_normals += s.normals;
        summary.total_abnormals += s.abnormals;
        summary.subsets.push_back(std::move(s));
    }
    if (summary.total_rows > 0) {
        summary.normal_share = static_cast<double>(summary.total_normals) /
                               static_cast<double>(summary.total_rows);
        summary.abnormal_share = static_cast<double>(summary.total_abnormals) /
                                 static_cast<double>(summary.total_rows);
    }
    return summary;
}

} // namespace avp
