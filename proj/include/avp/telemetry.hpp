#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace avp {

enum class Label { unlabeled, normal, abnormal };

std::string to_string(Label label);
Label label_from_string(const std::string& text);

// One timestamped row of the telemetry schema.
struct TelemetryFrame {
    double t = 0.0;                  // [s]
    bool arm = true;
    double desired_speed = 0.0;      // [m/s]
    double longitudinal_speed = 0.0; // [m/s]
    double lateral_speed = 0.0;      // [m/s]
    double measured_speed = 0.0;     // [m/s]
    double obstacle_distance = 0.0;  // [m]
    double steering_angle = 0.0;     // [rad]
    double yaw_angle = 0.0;          // [rad]
    double yaw_rate = 0.0;           // [rad/s]
    double throttle = 0.0;           // [%], 0..100
    Label label = Label::unlabeled;
};

// Canonical feature order used for headers and column mapping.
const std::vector<std::string>& telemetry_feature_names();

// Maps canonical feature names to the column headers of an input file.
// Defaults map every feature to its canonical name.
struct ColumnMap {
    std::map<std::string, std::string> columns;

    ColumnMap();
    const std::string& column_for(const std::string& feature) const;
};

struct LoadReport {
    std::vector<TelemetryFrame> frames;  // sorted by timestamp
    std::size_t duplicate_timestamps_dropped = 0;
    std::vector<std::string> warnings;
};

// Reads a comma-separated telemetry file (header row required). Rows with
// unparseable numerics raise DataError naming the row and column; a missing
// column raises DataError naming the unresolved feature. Frames come back
// sorted by timestamp with duplicate timestamps dropped (first kept).
// An optional trailing label column is honored when present.
LoadReport load_frames(const std::string& path, const ColumnMap& map = ColumnMap());

// Writes the canonical comma-separated format: canonical header, '.' decimal
// separator, round-trip float precision, trailing label column.
void write_frames(const std::string& path, std::span<const TelemetryFrame> frames);
std::string frames_to_csv(std::span<const TelemetryFrame> frames);

enum class SubsetKind { normal, attack };

// Stamps every frame with the subset's label.
std::vector<TelemetryFrame> label_by_subset(std::vector<TelemetryFrame> frames, SubsetKind kind);

struct LaserSample {
    double t = 0.0;
    int state = 0;  // 0 or 1
};

struct LaserLog {
    std::vector<LaserSample> samples;  // time-sorted
};

LaserLog load_laser_log(const std::string& path);
void write_laser_log(const std::string& path, const LaserLog& log);

struct JoinResult {
    std::vector<TelemetryFrame> frames;
    std::size_t unmatched = 0;  // frames with no log entry within tolerance
    bool unmatched_warning = false;  // set when unmatched exceeds 1% of frames
};

// Nearest-timestamp join of attacker laser state onto frames. A frame within
// tolerance of a log entry gets label abnormal iff that entry's state is 1
// (normal otherwise); frames without a match keep their prior label.
// Equidistant neighbors resolve to the earlier entry.
JoinResult join_laser_log(std::vector<TelemetryFrame> frames, const LaserLog& log, double tolerance);

// Half the median inter-frame interval; the default join tolerance.
double default_join_tolerance(std::span<const TelemetryFrame> frames);

// Seed-deterministic stratified partition of 0/1 labels into k folds.
// Per fold and class, counts differ from exact proportionality by at most
// one sample. Rejects k < 2, single-class inputs and k above the minority
// class count. Fold contents are returned as ascending row indices.
std::vector<std::vector<std::size_t>> stratified_fold_indices(const std::vector<int>& labels,
                                                              std::size_t k, std::uint64_t seed);

// Frame-level wrapper; abnormal counts as the positive class and unlabeled
// frames are rejected.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const TelemetryFrame> frames,
                                                       std::size_t k, std::uint64_t seed);

struct SubsetSummary {
    std::string name;
    std::size_t rows = 0;
    std::size_t normals = 0;
    std::size_t abnormals = 0;
};

struct DatasetSummary {
    std::vector<SubsetSummary> subsets;
    std::size_t total_rows = 0;
    std::size_t total_normals = 0;
    std::size_t total_abnormals = 0;
    double normal_share = 0.0;
    double abnormal_share = 0.0;
};

DatasetSummary summarize(const std::vector<std::pair<std::string, std::span<const TelemetryFrame>>>& subsets);

} // namespace avp
