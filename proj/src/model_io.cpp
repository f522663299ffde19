#include <fstream>
#include <sstream>

#include "avp/classifiers.hpp"
#include "avp/errors.hpp"

#include <json.hpp>

namespace avp {

namespace {

using nlohmann::json;

json hyper_to_json(const Hyperparams& h) {
    return json{{"lr_learning_rate", h.lr_learning_rate},
                {"lr_epochs", h.lr_epochs},
                {"lr_l2", h.lr_l2},
                {"rf_trees", h.rf_trees},
                {"rf_max_depth", h.rf_max_depth},
                {"rf_min_samples_split", h.rf_min_samples_split},
                {"rf_max_features", h.rf_max_features},
                {"rf_bootstrap", h.rf_bootstrap},
                {"knn_k", h.knn_k},
                {"gnb_var_floor", h.gnb_var_floor}};
}

Hyperparams hyper_from_json(const json& j) {
    Hyperparams h;
    h.lr_learning_rate = j.at("lr_learning_rate").get<double>();
    h.lr_epochs = j.at("lr_epochs").get<int>();
    h.lr_l2 = j.at("lr_l2").get<double>();
    h.rf_trees = j.at("rf_trees").get<int>();
    h.rf_max_depth = j.at("rf_max_depth").get<int>();
    h.rf_min_samples_split = j.at("rf_min_samples_split").get<int>();
    h.rf_max_features = j.at("rf_max_features").get<int>();
    h.rf_bootstrap = j.at("rf_bootstrap").get<bool>();
    h.knn_k = j.at("knn_k").get<int>();
    h.gnb_var_floor = j.at("gnb_var_floor").get<double>();
    return h;
}

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back(json{{"f", n.feature},
                             {"t", n.threshold},
                             {"l", n.left},
                             {"r", n.right},
                             {"p", n.abnormal_fraction}});
    }
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree tree;
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<std::int32_t>();
        n.right = jn.at("r").get<std::int32_t>();
        n.abnormal_fraction = jn.at("p").get<double>();
        tree.nodes.push_back(n);
    }
    return tree;
}

// Structural consistency of a deserialized model: index ranges and
// per-feature array sizes must line up before prediction may touch them.
void validate_loaded(const TrainedModel& model, const std::string& path) {
    const auto d = model.feature_names.size();
    auto fail = [&](const std::string& what) { throw DataError(path + ": " + what); };
    if (model.scaler.mean.size() != d || model.scaler.stddev.size() != d) {
        fail("scaler size does not match the feature names");
    }
    switch (model.kind) {
        case ModelKind::logistic_regression:
            if (model.logistic.weights.size() != d) fail("weight vector size mismatch");
            break;
        case ModelKind::random_forest:
            if (model.forest.trees.empty()) fail("forest has no trees");
            for (const auto& tree : model.forest.trees) {
                if (tree.nodes.empty()) fail("tree has no nodes");
                auto n = static_cast<std::int32_t>(tree.nodes.size());
                for (const auto& node : tree.nodes) {
                    if (node.feature >= 0) {
                        if (static_cast<std::size_t>(node.feature) >= d) fail("node feature out of range");
                        if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n) {
                            fail("node child index out of range");
                        }
                    }
                }
            }
            break;
        case ModelKind::knn:
            if (model.knn.n_cols != d || model.knn.train_labels.empty() ||
                model.knn.train_values.size() != model.knn.train_labels.size() * d) {
                fail("stored training set size mismatch");
            }
            break;
        case ModelKind::gaussian_nb:
            if (model.gnb.mean_normal.size() != d || model.gnb.var_normal.size() != d ||
                model.gnb.mean_abnormal.size() != d || model.gnb.var_abnormal.size() != d) {
                fail("class statistics size mismatch");
            }
            break;
    }
}

} // namespace

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["format_version"] = TrainedModel::kFormatVersion;
    j["kind"] = to_string(model.kind);
    j["seed"] = model.seed;
    j["hyperparams"] = hyper_to_json(model.hyper);
    j["feature_names"] = model.feature_names;
    j["scaler"] = json{{"mean", model.scaler.mean}, {"stddev", model.scaler.stddev}};
    j["provenance"] = model.provenance;
    switch (model.kind) {
        case ModelKind::logistic_regression:
            j["logistic"] = json{{"weights", model.logistic.weights}, {"bias", model.logistic.bias}};
            break;
        case ModelKind::random_forest: {
            json trees = json::array();
            for (const auto& tree : model.forest.trees) trees.push_back(tree_to_json(tree));
            j["forest"] = json{{"trees", std::move(trees)}};
            break;
        }
        case ModelKind::knn:
            j["knn"] = json{{"train_values", model.knn.train_values},
                            {"train_labels", model.knn.train_labels},
                            {"n_cols", model.knn.n_cols}};
            break;
        case ModelKind::gaussian_nb:
            j["gnb"] = json{{"prior_abnormal", model.gnb.prior_abnormal},
                            {"mean_normal", model.gnb.mean_normal},
                            {"var_normal", model.gnb.var_normal},
                            {"mean_abnormal", model.gnb.mean_abnormal},
                            {"var_abnormal", model.gnb.var_abnormal}};
            break;
    }
    return j.dump(2) + "\n";
}

void save_model(const std::string& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write model file: " + path);
    }
    out << model_to_json(model);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed model file: " + e.what());
    }
    try {
        int version = j.at("format_version").get<int>();
        if (version > TrainedModel::kFormatVersion) {
            throw DataError(path + ": model format version " + std::to_string(version) +
                            " is newer than the supported version " +
                            std::to_string(TrainedModel::kFormatVersion));
        }
        TrainedModel model;
        model.kind = model_kind_from_string(j.at("kind").get<std::string>());
        model.seed = j.at("seed").get<std::uint64_t>();
        model.hyper = hyper_from_json(j.at("hyperparams"));
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
        model.scaler.stddev = j.at("scaler").at("stddev").get<std::vector<double>>();
        if (j.contains("provenance")) {
            model.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
        }
        switch (model.kind) {
            case ModelKind::logistic_regression:
                model.logistic.weights = j.at("logistic").at("weights").get<std::vector<double>>();
                model.logistic.bias = j.at("logistic").at("bias").get<double>();
                break;
            case ModelKind::random_forest:
                for (const auto& jt : j.at("forest").at("trees")) {
                    model.forest.trees.push_back(tree_from_json(jt));
                }
                break;
            case ModelKind::knn:
                model.knn.train_values = j.at("knn").at("train_values").get<std::vector<double>>();
                model.knn.train_labels = j.at("knn").at("train_labels").get<std::vector<int>>();
                model.knn.n_cols = j.at("knn").at("n_cols").get<std::size_t>();
                break;
            case ModelKind::gaussian_nb:
                model.gnb.prior_abnormal = j.at("gnb").at("prior_abnormal").get<double>();
                model.gnb.mean_normal = j.at("gnb").at("mean_normal").get<std::vector<double>>();
                model.gnb.var_normal = j.at("gnb").at("var_normal").get<std::vector<double>>();
                model.gnb.mean_abnormal = j.at("gnb").at("mean_abnormal").get<std::vector<double>>();
                model.gnb.var_abnormal = j.at("gnb").at("var_abnormal").get<std::vector<double>>();
                break;
        }
        validate_loaded(model, path);
        return model;
    } catch (const json::exception& e) {
        throw DataError(path + ": incomplete model file: " + e.what());
    }
}

} // namespace avp
