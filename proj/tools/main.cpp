// Command-line front end: simulate, ingest, featurize, train, crossval,
// tune, detect, report. Every run writes its resolved configuration and a
// checksummed manifest into the output directory so results can be replayed.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avp/classifiers.hpp"
#include "avp/config.hpp"
#include "avp/detector.hpp"
#include "avp/dynamics.hpp"
#include "avp/errors.hpp"
#include "avp/features.hpp"
#include "avp/manifest.hpp"
#include "avp/simulate.hpp"
#include "avp/telemetry.hpp"

namespace fs = std::filesystem;
using namespace avp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string fmt(double value, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

std::string fmt_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

// Collects a run's artifacts and finalizes the manifest.
class RunDir {
public:
    RunDir(std::string command, std::string dir) : command_(std::move(command)), dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    void write_text(const std::string& name, const std::string& content) {
        write_file(path(name), content);
        manifest_.add_output(path(name));
    }

    void note_output(const std::string& name) { manifest_.add_output(path(name)); }
    void note_input(const std::string& file_path) { manifest_.add_input(file_path); }

    void finalize(const std::string& resolved_config) {
        write_file(path("run_config.ini"), resolved_config);
        manifest_.add_output(path("run_config.ini"));
        manifest_.command = command_;
        manifest_.config_hash = "fnv1a64:" + fnv1a64_hex(resolved_config);
        manifest_.write(path("manifest.json"));
    }

private:
    std::string command_;
    std::string dir_;
    Manifest manifest_;
};

// Aligned table or key = value lines, per the requested report format.
std::string render_table(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& rows,
                         const std::string& format) {
    std::string out;
    if (format == "structured") {
        for (const auto& row : rows) {
            for (std::size_t c = 1; c < row.size(); ++c) {
                out += row[0] + "." + headers[c] + " = " + row[c] + "\n";
            }
        }
        return out;
    }
    std::vector<std::size_t> width(headers.size(), 0);
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            if (c + 1 < row.size()) out.append(width[c] - row[c].size() + 2, ' ');
        }
        out += '\n';
    };
    emit(headers);
    for (const auto& row : rows) emit(row);
    return out;
}

VehicleParams params_from_file(const std::string& path) {
    return path.empty() ? VehicleParams{} : load_vehicle_params(path);
}

struct HyperFlags {
    Hyperparams hyper;
    bool no_bootstrap = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lr-rate", hyper.lr_learning_rate, "logistic regression learning rate");
        cmd->add_option("--lr-epochs", hyper.lr_epochs, "logistic regression epochs");
        cmd->add_option("--lr-l2", hyper.lr_l2, "logistic regression L2 strength");
        cmd->add_option("--rf-trees", hyper.rf_trees, "random forest tree count");
        cmd->add_option("--rf-max-depth", hyper.rf_max_depth, "random forest depth limit (0 = unlimited)");
        cmd->add_option("--rf-min-split", hyper.rf_min_samples_split, "random forest min samples to split");
        cmd->add_option("--rf-max-features", hyper.rf_max_features,
                        "features tried per split (0 = ceil(sqrt(d)))");
        cmd->add_flag("--rf-no-bootstrap", no_bootstrap, "disable bootstrap sampling");
        cmd->add_option("--knn-k", hyper.knn_k, "neighbor count");
        cmd->add_option("--gnb-var-floor", hyper.gnb_var_floor, "relative variance floor");
    }

    Hyperparams resolve() const {
        Hyperparams h = hyper;
        h.rf_bootstrap = !no_bootstrap;
        return h;
    }
};

Margin parse_margin(const std::string& text) {
    auto sep = text.find(':');
    if (sep == std::string::npos) {
        throw std::invalid_argument("margin must look like lo:hi, got '" + text + "'");
    }
    Margin m;
    m.lo = to_double(text.substr(0, sep), "margin lower bound");
    m.hi = to_double(text.substr(sep + 1), "margin upper bound");
    return m;
}

std::string metrics_footnote(const EvalMetrics& m) {
    std::string note;
    if (m.tp + m.fp == 0) note += " [precision undefined (no positive predictions), rendered as 0]";
    if (m.tp + m.fn == 0) note += " [recall undefined (no positive samples), rendered as 0]";
    return note;
}

std::string histogram_csv(const ScoreDistribution& dist) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < dist.counts.size(); ++b) {
        out += fmt_full(dist.bin_edges[b]);
        out += ',';
        out += fmt_full(dist.bin_edges[b + 1]);
        out += ',';
        out += std::to_string(dist.counts[b]);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string scenario_path;
    std::string params_path;
    std::string out_dir;
    std::int64_t seed_override = -1;
};

int cmd_simulate(const SimulateArgs& args, const std::string& resolved) {
    RunDir run("simulate", args.out_dir);
    run.note_input(args.scenario_path);
    if (!args.params_path.empty()) run.note_input(args.params_path);

    ScenarioFile file = load_scenario(args.scenario_path);
    if (args.seed_override >= 0) file.scenario.seed = static_cast<std::uint64_t>(args.seed_override);
    VehicleParams params = params_from_file(args.params_path);

    std::vector<TelemetryFrame> frames;
    LaserLog log;
    if (file.has_attack) {
        AttackRun attacked = run_attack_scenario(params, file.scenario, file.attack);
        frames = std::move(attacked.frames);
        log = std::move(attacked.log);
    } else {
        frames = run_scenario(params, file.scenario);
        log.samples.reserve(frames.size());
        for (const auto& f : frames) log.samples.push_back({f.t, 0});
    }

    write_frames(run.path("frames.csv"), frames);
    run.note_output("frames.csv");
    write_laser_log(run.path("laser_log.csv"), log);
    run.note_output("laser_log.csv");
    run.finalize(resolved);

    std::size_t abnormal = 0;
    for (const auto& f : frames) abnormal += f.label == Label::abnormal ? 1 : 0;
    std::cout << "simulate: " << frames.size() << " frames (" << abnormal << " abnormal) -> "
              << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::vector<std::string> normal_files;
    std::vector<std::string> attack_files;
    std::vector<std::string> unlabeled_files;
    std::string laser_log_path;
    double tolerance = -1.0;  // negative = half the median frame interval
    std::string out_dir;
};

int cmd_ingest(const IngestArgs& args, const std::string& resolved) {
    if (args.normal_files.empty() && args.attack_files.empty() && args.unlabeled_files.empty()) {
        throw std::invalid_argument("ingest needs at least one input file");
    }
    RunDir run("ingest", args.out_dir);

    std::vector<std::pair<std::string, std::vector<TelemetryFrame>>> subsets;
    auto load_all = [&](const std::vector<std::string>& files) {
        std::vector<std::vector<TelemetryFrame>> loaded;
        for (const auto& path : files) {
            run.note_input(path);
            LoadReport report = load_frames(path);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
            loaded.push_back(std::move(report.frames));
        }
        return loaded;
    };

    auto normals = load_all(args.normal_files);
    for (std::size_t i = 0; i < normals.size(); ++i) {
        subsets.emplace_back(args.normal_files[i], label_by_subset(std::move(normals[i]), SubsetKind::normal));
    }
    auto attacks = load_all(args.attack_files);
    for (std::size_t i = 0; i < attacks.size(); ++i) {
        subsets.emplace_back(args.attack_files[i], label_by_subset(std::move(attacks[i]), SubsetKind::attack));
    }
    auto plain = load_all(args.unlabeled_files);
    std::optional<LaserLog> log;
    if (!args.laser_log_path.empty()) {
        run.note_input(args.laser_log_path);
        log = load_laser_log(args.laser_log_path);
    }
    for (std::size_t i = 0; i < plain.size(); ++i) {
        if (log.has_value()) {
            double tol = args.tolerance >= 0.0 ? args.tolerance : default_join_tolerance(plain[i]);
            JoinResult joined = join_laser_log(std::move(plain[i]), *log, tol);
            if (joined.unmatched_warning) {
                std::cerr << "warning: " << args.unlabeled_files[i] << ": " << joined.unmatched
                          << " frames lack a laser-log match within " << fmt(tol, 4) << " s\n";
            }
            subsets.emplace_back(args.unlabeled_files[i], std::move(joined.frames));
        } else {
            std::cerr << "warning: " << args.unlabeled_files[i]
                      << " ingested without labels (no laser log given)\n";
            subsets.emplace_back(args.unlabeled_files[i], std::move(plain[i]));
        }
    }

    std::vector<TelemetryFrame> all;
    std::vector<std::pair<std::string, std::span<const TelemetryFrame>>> views;
    for (const auto& [name, frames] : subsets) views.emplace_back(name, frames);
    DatasetSummary summary = summarize(views);
    for (auto& [name, frames] : subsets) {
        all.insert(all.end(), frames.begin(), frames.end());
    }

    write_frames(run.path("labeled.csv"), all);
    run.note_output("labeled.csv");

    std::vector<std::vector<std::string>> rows;
    for (const auto& s : summary.subsets) {
        rows.push_back({s.name, std::to_string(s.rows), std::to_string(s.normals),
                        std::to_string(s.abnormals)});
    }
    rows.push_back({"total", std::to_string(summary.total_rows), std::to_string(summary.total_normals),
                    std::to_string(summary.total_abnormals)});
    std::string report = render_table({"subset", "rows", "normal", "abnormal"}, rows, "tabular");
    report += "normal share:   " + fmt(summary.normal_share, 4) + "\n";
    report += "abnormal share: " + fmt(summary.abnormal_share, 4) + "\n";
    run.write_text("summary.txt", report);
    run.finalize(resolved);
    std::cout << report;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeArgs {
    std::string input_path;
    std::string params_path;
    std::string out_dir;
    FeaturizerConfig config;
    bool no_raw = false;
    bool no_residuals = false;

    FeaturizerConfig resolve() const {
        FeaturizerConfig c = config;
        c.include_raw = !no_raw;
        c.include_residuals = !no_residuals;
        return c;
    }
};

int cmd_featurize(const FeaturizeArgs& args, const std::string& resolved) {
    RunDir run("featurize", args.out_dir);
    run.note_input(args.input_path);
    if (!args.params_path.empty()) run.note_input(args.params_path);

    LoadReport report = load_frames(args.input_path);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : report.frames) {
        if (f.label == Label::unlabeled) {
            throw DataError(args.input_path + ": unlabeled frames; run ingest first");
        }
    }
    VehicleParams params = params_from_file(args.params_path);
    FeaturizerConfig config = args.resolve();
    FeatureMatrix matrix = build_features(report.frames, params, config);
    matrix.provenance = args.input_path + " fnv1a64:" + fnv1a64_hex(resolved);

    write_feature_matrix(run.path("features.csv"), matrix);
    run.note_output("features.csv");
    write_featurizer_sidecar(run.path("features.csv.meta"), config,
                             args.params_path.empty() ? "<defaults>" : args.params_path);
    run.note_output("features.csv.meta");
    run.finalize(resolved);
    std::cout << "featurize: " << matrix.n_rows << " samples x " << matrix.n_cols << " features -> "
              << args.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string features_path;
    std::string kind = "rf";
    std::uint64_t seed = 0;
    std::string out_dir;
    HyperFlags hyper_flags;
};

int cmd_train(const TrainArgs& args, const std::string& resolved) {
    RunDir run("train", args.out_dir);
    run.note_input(args.features_path);

    FeatureMatrix matrix = load_feature_matrix(args.features_path);
    TrainedModel model = train(model_kind_from_string(args.kind), matrix,
                               args.hyper_flags.resolve(), args.seed);
    model.provenance["features"] = args.features_path;

    // Carry the featurizer settings along when the sidecar is present, so
    // detect can rebuild matching features from raw telemetry.
    std::string sidecar = args.features_path + ".meta";
    if (fs::exists(sidecar)) {
        std::string params_source;
        FeaturizerConfig fc = load_featurizer_sidecar(sidecar, &params_source);
        model.provenance["window"] = std::to_string(fc.window);
        model.provenance["include_raw"] = fc.include_raw ? "true" : "false";
        model.provenance["include_residuals"] = fc.include_residuals ? "true" : "false";
        model.provenance["include_arm"] = fc.include_arm ? "true" : "false";
        model.provenance["params_source"] = params_source;
    }

    save_model(run.path("model.json"), model);
    run.note_output("model.json");
    run.finalize(resolved);
    std::cout << "train: " << args.kind << " on " << matrix.n_rows << " samples -> "
              << run.path("model.json") << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// crossval

struct CrossvalArgs {
    std::string features_path;
    std::vector<std::string> kinds = {"lr", "rf", "knn", "gnb"};
    std::size_t k = 5;
    std::uint64_t seed = 0;
    std::string format = "tabular";
    std::string out_dir;
    HyperFlags hyper_flags;
};

int cmd_crossval(const CrossvalArgs& args, const std::string& resolved) {
    if (args.k < 2) {
        throw std::invalid_argument("cross-validation needs k >= 2");
    }
    RunDir run("crossval", args.out_dir);
    run.note_input(args.features_path);
    FeatureMatrix matrix = load_feature_matrix(args.features_path);

    std::vector<std::string> headers = {"metric"};
    std::vector<std::vector<std::string>> rows = {
        {"precision"}, {"recall"}, {"f1"}, {"accuracy"}};
    std::string footnotes;

    for (const auto& kind_name : args.kinds) {
        ModelKind kind = model_kind_from_string(kind_name);
        CrossValResult result =
            cross_validate(kind, matrix, args.k, args.hyper_flags.resolve(), args.seed);
        headers.push_back(kind_name);
        rows[0].push_back(fmt(result.mean.precision, 3));
        rows[1].push_back(fmt(result.mean.recall, 3));
        rows[2].push_back(fmt(result.mean.f1, 3));
        rows[3].push_back(fmt(result.mean.accuracy, 3));

        std::string folds = "fold,precision,recall,f1,accuracy\n";
        for (std::size_t f = 0; f < result.per_fold.size(); ++f) {
            const EvalMetrics& m = result.per_fold[f];
            folds += std::to_string(f + 1) + ',' + fmt_full(m.precision) + ',' + fmt_full(m.recall) +
                     ',' + fmt_full(m.f1) + ',' + fmt_full(m.accuracy) + '\n';
            std::string note = metrics_footnote(m);
            if (!note.empty()) {
                footnotes += kind_name + " fold " + std::to_string(f + 1) + note + "\n";
            }
        }
        run.write_text("crossval_" + kind_name + ".csv", folds);
    }

    std::string report = render_table(headers, rows, args.format);
    if (!footnotes.empty()) report += footnotes;
    run.write_text("report.txt", report);
    run.finalize(resolved);
    std::cout << report;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
    std::string model_path;
    std::string features_path;
    std::vector<std::string> margin_specs;
    std::size_t bins = 50;
    std::string format = "tabular";
    std::string out_dir;
};

int cmd_tune(const TuneArgs& args, const std::string& resolved) {
    RunDir run("tune", args.out_dir);
    run.note_input(args.model_path);
    run.note_input(args.features_path);

    TrainedModel model = load_model(args.model_path);
    FeatureMatrix matrix = load_feature_matrix(args.features_path);
    if (matrix.names != model.feature_names) {
        throw DataError("feature names of " + args.features_path + " do not match the model");
    }

    std::vector<double> normal_scores, attack_scores;
    std::vector<double> scores = score_all(model, matrix);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (matrix.labels[i] == 1 ? attack_scores : normal_scores).push_back(scores[i]);
    }

    std::vector<Margin> margins;
    if (args.margin_specs.empty()) {
        margins = default_margins();
    } else {
        for (const auto& spec : args.margin_specs) margins.push_back(parse_margin(spec));
    }
    TuneResult result = tune_threshold(normal_scores, attack_scores, margins);

    std::string csv = "margin_lo,margin_hi,normal_misclassified,attack_misclassified,fp_rate,fn_rate\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : result.ranked) {
        csv += fmt_full(r.margin.lo) + std::string(",") + fmt_full(r.margin.hi) + ',' +
               std::to_string(r.normal_misclassified) + ',' + std::to_string(r.attack_misclassified) +
               ',' + fmt_full(r.fp_rate) + ',' + fmt_full(r.fn_rate) + '\n';
        rows.push_back({fmt(r.margin.lo, 2) + " - " + fmt(r.margin.hi, 2),
                        std::to_string(r.normal_misclassified),
                        std::to_string(r.attack_misclassified), fmt(r.fp_rate, 4),
                        fmt(r.fn_rate, 5)});
    }
    run.write_text("margins.csv", csv);

    auto [hist_normal, hist_abnormal] = score_distribution(model, matrix, args.bins);
    run.write_text("hist_normal.csv", histogram_csv(hist_normal));
    run.write_text("hist_abnormal.csv", histogram_csv(hist_abnormal));

    double tuned = 0.5 * (result.winner.margin.lo + result.winner.margin.hi);
    std::string report = render_table(
        {"margin", "normal_misclassified", "attack_misclassified", "fp_rate", "fn_rate"}, rows,
        args.format);
    report += "winner: [" + fmt(result.winner.margin.lo, 2) + ", " + fmt(result.winner.margin.hi, 2) +
              "]\n";
    report += "tuned_threshold = " + fmt_full(tuned) + "\n";
    run.write_text("report.txt", report);
    run.finalize(resolved);
    std::cout << report;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string model_path;
    std::string input_path;
    std::string params_path;
    double threshold = 0.5;
    std::int64_t window_override = -1;
    std::string out_dir;
};

int cmd_detect(const DetectArgs& args, const std::string& resolved) {
    RunDir run("detect", args.out_dir);
    run.note_input(args.model_path);
    run.note_input(args.input_path);
    if (!args.params_path.empty()) run.note_input(args.params_path);

    TrainedModel model = load_model(args.model_path);
    LoadReport report = load_frames(args.input_path);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    FeaturizerConfig config;
    config.allow_unlabeled = true;
    auto prov = [&](const std::string& key) -> std::optional<std::string> {
        auto it = model.provenance.find(key);
        if (it == model.provenance.end()) return std::nullopt;
        return it->second;
    };
    if (auto window = prov("window")) config.window = static_cast<std::size_t>(std::stoull(*window));
    if (auto flag = prov("include_raw")) config.include_raw = *flag == "true";
    if (auto flag = prov("include_residuals")) config.include_residuals = *flag == "true";
    if (auto flag = prov("include_arm")) config.include_arm = *flag == "true";
    if (args.window_override >= 1) config.window = static_cast<std::size_t>(args.window_override);

    VehicleParams params = params_from_file(args.params_path);
    FeatureMatrix matrix = build_features(report.frames, params, config);
    if (matrix.names != model.feature_names) {
        throw DataError("featurized input does not match the model's feature names; "
                        "check --params and --window against the training setup");
    }

    DetectorConfig detector{args.threshold, &model};
    detector.validate();
    std::string verdicts = "timestamp,score,decision\n";
    std::size_t alarms = 0;
    for (std::size_t i = 0; i < matrix.n_rows; ++i) {
        Verdict v = detect(detector, matrix.row(i));
        alarms += v.abnormal ? 1 : 0;
        verdicts += fmt_full(report.frames[i + 1].t) + std::string(",") + fmt_full(v.score) + ',' +
                    (v.abnormal ? "abnormal" : "normal") + '\n';
    }
    run.write_text("verdicts.csv", verdicts);
    run.finalize(resolved);
    std::cout << "detect: " << alarms << " alarms over " << matrix.n_rows << " samples (threshold "
              << fmt(args.threshold, 3) << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& run_dir) {
    std::string manifest_path = (fs::path(run_dir) / "manifest.json").string();
    std::cout << read_file(manifest_path);
    std::string report_path = (fs::path(run_dir) / "report.txt").string();
    if (fs::exists(report_path)) {
        std::cout << "\n" << read_file(report_path);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anomaly detection toolkit for autonomous-vehicle perception telemetry"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "read options from a recorded run config");

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "generate synthetic telemetry from a scenario file");
    c_sim->add_option("--scenario", sim.scenario_path, "scenario config file")->required();
    c_sim->add_option("--params", sim.params_path, "vehicle params file (defaults when omitted)");
    c_sim->add_option("--seed", sim.seed_override, "override the scenario seed");
    c_sim->add_option("--out", sim.out_dir, "output directory")->required();

    IngestArgs ing;
    CLI::App* c_ing = app.add_subcommand("ingest", "load, validate and label telemetry files");
    c_ing->add_option("--normal", ing.normal_files, "telemetry files labeled normal");
    c_ing->add_option("--attack", ing.attack_files, "telemetry files labeled abnormal");
    c_ing->add_option("--input", ing.unlabeled_files, "telemetry files labeled via the laser log");
    c_ing->add_option("--laser-log", ing.laser_log_path, "attacker laser-state log");
    c_ing->add_option("--tolerance", ing.tolerance, "laser join tolerance in seconds (default: auto)");
    c_ing->add_option("--out", ing.out_dir, "output directory")->required();

    FeaturizeArgs feat;
    CLI::App* c_feat = app.add_subcommand("featurize", "build the model-ready feature matrix");
    c_feat->add_option("--input", feat.input_path, "labeled telemetry file")->required();
    c_feat->add_option("--params", feat.params_path, "vehicle params file");
    c_feat->add_option("--window", feat.config.window, "rolling residual window");
    c_feat->add_flag("--no-raw", feat.no_raw, "drop raw telemetry channels");
    c_feat->add_flag("--no-residuals", feat.no_residuals, "drop physics residual features");
    c_feat->add_flag("--include-arm", feat.config.include_arm, "include the arm flag");
    c_feat->add_option("--out", feat.out_dir, "output directory")->required();

    TrainArgs tr;
    CLI::App* c_tr = app.add_subcommand("train", "train a classifier on a feature matrix");
    c_tr->add_option("--features", tr.features_path, "feature matrix file")->required();
    c_tr->add_option("--kind", tr.kind, "lr|rf|knn|gnb");
    c_tr->add_option("--seed", tr.seed, "training seed");
    tr.hyper_flags.attach(c_tr);
    c_tr->add_option("--out", tr.out_dir, "output directory")->required();

    CrossvalArgs cv;
    CLI::App* c_cv = app.add_subcommand("crossval", "stratified k-fold cross-validation report");
    c_cv->add_option("--features", cv.features_path, "feature matrix file")->required();
    c_cv->add_option("--kinds", cv.kinds, "classifier kinds to compare");
    c_cv->add_option("--k", cv.k, "fold count");
    c_cv->add_option("--seed", cv.seed, "fold shuffle / training seed");
    c_cv->add_option("--format", cv.format, "tabular|structured")
        ->check(CLI::IsMember({"tabular", "structured"}));
    cv.hyper_flags.attach(c_cv);
    c_cv->add_option("--out", cv.out_dir, "output directory")->required();

    TuneArgs tune;
    CLI::App* c_tune = app.add_subcommand("tune", "margin analysis and threshold placement");
    c_tune->add_option("--model", tune.model_path, "trained model file")->required();
    c_tune->add_option("--features", tune.features_path, "labeled evaluation features")->required();
    c_tune->add_option("--margin", tune.margin_specs, "candidate margin lo:hi (repeatable)");
    c_tune->add_option("--bins", tune.bins, "score histogram bins");
    c_tune->add_option("--format", tune.format, "tabular|structured")
        ->check(CLI::IsMember({"tabular", "structured"}));
    c_tune->add_option("--out", tune.out_dir, "output directory")->required();

    DetectArgs det;
    CLI::App* c_det = app.add_subcommand("detect", "score telemetry and emit verdicts");
    c_det->add_option("--model", det.model_path, "trained model file")->required();
    c_det->add_option("--input", det.input_path, "telemetry file")->required();
    c_det->add_option("--params", det.params_path, "vehicle params file");
    c_det->add_option("--threshold", det.threshold, "alarm threshold");
    c_det->add_option("--window", det.window_override, "rolling window override");
    c_det->add_option("--out", det.out_dir, "output directory")->required();

    std::string report_dir;
    CLI::App* c_rep = app.add_subcommand("report", "print a run directory's manifest and report");
    c_rep->add_option("--run", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        auto resolved = [](CLI::App* sub) {
            return "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
        };
        if (c_sim->parsed()) return cmd_simulate(sim, resolved(c_sim));
        if (c_ing->parsed()) return cmd_ingest(ing, resolved(c_ing));
        if (c_feat->parsed()) return cmd_featurize(feat, resolved(c_feat));
        if (c_tr->parsed()) return cmd_train(tr, resolved(c_tr));
        if (c_cv->parsed()) return cmd_crossval(cv, resolved(c_cv));
        if (c_tune->parsed()) return cmd_tune(tune, resolved(c_tune));
        if (c_det->parsed()) return cmd_detect(det, resolved(c_det));
        if (c_rep->parsed()) return cmd_report(report_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
