#include "avp/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "avp/errors.hpp"
#include "avp/rng.hpp"

namespace avp {

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "lr" || name == "logistic_regression") return ModelKind::logistic_regression;
    if (name == "rf" || name == "random_forest") return ModelKind::random_forest;
    if (name == "knn") return ModelKind::knn;
    if (name == "gnb" || name == "gaussian_nb" || name == "nb") return ModelKind::gaussian_nb;
    throw std::invalid_argument("unknown model kind: " + name + " (expected lr|rf|knn|gnb)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::logistic_regression: return "lr";
        case ModelKind::random_forest: return "rf";
        case ModelKind::knn: return "knn";
        default: return "gnb";
    }
}

void Hyperparams::validate(ModelKind kind) const {
    switch (kind) {
        case ModelKind::logistic_regression:
            if (!(lr_learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
            if (lr_epochs < 1) throw std::invalid_argument("epoch count must be at least 1");
            if (lr_l2 < 0.0) throw std::invalid_argument("L2 strength must be non-negative");
            break;
        case ModelKind::random_forest:
            if (rf_trees < 1) throw std::invalid_argument("forest needs at least one tree");
            if (rf_max_depth < 0) throw std::invalid_argument("max depth must be non-negative");
            if (rf_min_samples_split < 2) throw std::invalid_argument("min samples split must be >= 2");
            if (rf_max_features < 0) throw std::invalid_argument("max features must be non-negative");
            break;
        case ModelKind::knn:
            if (knn_k < 1) throw std::invalid_argument("k must be at least 1");
            break;
        case ModelKind::gaussian_nb:
            if (!(gnb_var_floor >= 0.0)) throw std::invalid_argument("variance floor must be non-negative");
            break;
    }
}

EvalMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    EvalMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    std::size_t total = tp + fp + tn + fn;
    m.accuracy = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    return m;
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

LogisticParams train_logistic(const FeatureMatrix& X, const Hyperparams& hyper) {
    LogisticParams p;
    p.weights.assign(X.n_cols, 0.0);
    p.bias = 0.0;
    const double n = static_cast<double>(X.n_rows);
    std::vector<double> grad(X.n_cols);
    for (int epoch = 0; epoch < hyper.lr_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < X.n_rows; ++i) {
            auto row = X.row(i);
            double z = p.bias;
            for (std::size_t j = 0; j < X.n_cols; ++j) z += p.weights[j] * row[j];
            double err = sigmoid(z) - static_cast<double>(X.labels[i]);
            for (std::size_t j = 0; j < X.n_cols; ++j) grad[j] += err * row[j];
            grad_bias += err;
        }
        for (std::size_t j = 0; j < X.n_cols; ++j) {
            p.weights[j] -= hyper.lr_learning_rate * (grad[j] / n + hyper.lr_l2 * p.weights[j]);
        }
        p.bias -= hyper.lr_learning_rate * grad_bias / n;
    }
    for (double w : p.weights) {
        if (!std::isfinite(w)) throw NumericError("logistic regression diverged to non-finite weights");
    }
    if (!std::isfinite(p.bias)) throw NumericError("logistic regression diverged to non-finite bias");
    return p;
}

GnbParams train_gnb(const FeatureMatrix& X, const Hyperparams& hyper) {
    GnbParams p;
    std::size_t n1 = static_cast<std::size_t>(
        std::count(X.labels.begin(), X.labels.end(), 1));
    std::size_t n0 = X.n_rows - n1;
    p.prior_abnormal = static_cast<double>(n1) / static_cast<double>(X.n_rows);
    p.mean_normal.assign(X.n_cols, 0.0);
    p.mean_abnormal.assign(X.n_cols, 0.0);
    p.var_normal.assign(X.n_cols, 0.0);
    p.var_abnormal.assign(X.n_cols, 0.0);

    for (std::size_t i = 0; i < X.n_rows; ++i) {
        auto& mean = X.labels[i] ? p.mean_abnormal : p.mean_normal;
        auto row = X.row(i);
        for (std::size_t j = 0; j < X.n_cols; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < X.n_cols; ++j) {
        p.mean_normal[j] /= static_cast<double>(n0);
        p.mean_abnormal[j] /= static_cast<double>(n1);
    }
    for (std::size_t i = 0; i < X.n_rows; ++i) {
        auto& mean = X.labels[i] ? p.mean_abnormal : p.mean_normal;
        auto& var = X.labels[i] ? p.var_abnormal : p.var_normal;
        auto row = X.row(i);
        for (std::size_t j = 0; j < X.n_cols; ++j) {
            double d = row[j] - mean[j];
            var[j] += d * d;
        }
    }
    double max_var = 0.0;
    for (std::size_t j = 0; j < X.n_cols; ++j) {
        p.var_normal[j] /= static_cast<double>(n0);
        p.var_abnormal[j] /= static_cast<double>(n1);
        // Overall population variance per feature, for the relative floor.
        double mean_all = (p.mean_normal[j] * static_cast<double>(n0) +
                           p.mean_abnormal[j] * static_cast<double>(n1)) /
                          static_cast<double>(X.n_rows);
        double dn = p.mean_normal[j] - mean_all;
        double da = p.mean_abnormal[j] - mean_all;
        double var_all = (static_cast<double>(n0) * (p.var_normal[j] + dn * dn) +
                          static_cast<double>(n1) * (p.var_abnormal[j] + da * da)) /
                         static_cast<double>(X.n_rows);
        max_var = std::max(max_var, var_all);
    }
    double floor = hyper.gnb_var_floor * max_var;
    if (floor <= 0.0) floor = 1e-12;  // all-constant features
    for (std::size_t j = 0; j < X.n_cols; ++j) {
        p.var_normal[j] = std::max(p.var_normal[j], floor);
        p.var_abnormal[j] = std::max(p.var_abnormal[j], floor);
    }
    return p;
}

double predict_logistic(const LogisticParams& p, std::span<const double> row) {
    double z = p.bias;
    for (std::size_t j = 0; j < row.size(); ++j) z += p.weights[j] * row[j];
    return sigmoid(z);
}

double predict_gnb(const GnbParams& p, std::span<const double> row) {
    // Both classes are present at training time, so the priors are in (0, 1).
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    double log_normal = std::log1p(-p.prior_abnormal);
    double log_abnormal = std::log(p.prior_abnormal);
    for (std::size_t j = 0; j < row.size(); ++j) {
        double dn = row[j] - p.mean_normal[j];
        double da = row[j] - p.mean_abnormal[j];
        log_normal -= 0.5 * (kLog2Pi + std::log(p.var_normal[j]) + dn * dn / p.var_normal[j]);
        log_abnormal -= 0.5 * (kLog2Pi + std::log(p.var_abnormal[j]) + da * da / p.var_abnormal[j]);
    }
    double peak = std::max(log_normal, log_abnormal);
    double en = std::exp(log_normal - peak);
    double ea = std::exp(log_abnormal - peak);
    return ea / (en + ea);
}

double predict_knn(const KnnParams& p, int k, std::span<const double> row) {
    std::size_t n = p.train_labels.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* train_row = p.train_values.data() + i * p.n_cols;
        double d2 = 0.0;
        for (std::size_t j = 0; j < p.n_cols; ++j) {
            double d = row[j] - train_row[j];
            d2 += d * d;
        }
        dist[i] = {d2, i};
    }
    // Ties resolve to the earlier training row.
    std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    std::size_t abnormal = 0;
    for (std::size_t i = 0; i < kk; ++i) {
        abnormal += p.train_labels[dist[i].second] == 1 ? 1 : 0;
    }
    return static_cast<double>(abnormal) / static_cast<double>(kk);
}

} // namespace

// Implemented in random_forest.cpp.
ForestParams train_forest(const FeatureMatrix& X, const Hyperparams& hyper, std::uint64_t seed);

TrainedModel train(ModelKind kind, const FeatureMatrix& matrix,
                   const Hyperparams& hyper, std::uint64_t seed) {
    hyper.validate(kind);
    if (matrix.n_rows == 0) {
        throw DataError("training matrix is empty");
    }
    for (double v : matrix.values) {
        if (!std::isfinite(v)) throw NumericError("training matrix contains non-finite features");
    }
    bool has0 = false, has1 = false;
    for (int label : matrix.labels) (label == 1 ? has1 : has0) = true;
    if (!has0 || !has1) {
        throw DataError("training requires both classes present");
    }

    TrainedModel model;
    model.kind = kind;
    model.hyper = hyper;
    model.seed = seed;
    model.feature_names = matrix.names;

    auto [scaled, stats] = standardize(matrix);
    model.scaler = std::move(stats);

    switch (kind) {
        case ModelKind::logistic_regression:
            model.logistic = train_logistic(scaled, hyper);
            break;
        case ModelKind::random_forest:
            model.forest = train_forest(scaled, hyper, seed);
            break;
        case ModelKind::knn:
            if (static_cast<std::size_t>(hyper.knn_k) > scaled.n_rows) {
                throw std::invalid_argument("k exceeds the training set size");
            }
            model.knn.train_values = scaled.values;
            model.knn.train_labels = scaled.labels;
            model.knn.n_cols = scaled.n_cols;
            break;
        case ModelKind::gaussian_nb:
            model.gnb = train_gnb(scaled, hyper);
            break;
    }
    return model;
}

double predict_proba(const TrainedModel& model, std::span<const double> sample) {
    if (sample.size() != model.feature_names.size()) {
        throw std::invalid_argument("sample has " + std::to_string(sample.size()) +
                                    " features, model expects " +
                                    std::to_string(model.feature_names.size()));
    }
    std::vector<double> scaled(sample.begin(), sample.end());
    for (std::size_t j = 0; j < scaled.size(); ++j) {
        if (model.scaler.stddev[j] > 0.0) {
            scaled[j] = (scaled[j] - model.scaler.mean[j]) / model.scaler.stddev[j];
        }
    }
    switch (model.kind) {
        case ModelKind::logistic_regression:
            return predict_logistic(model.logistic, scaled);
        case ModelKind::random_forest: {
            std::size_t votes = 0;
            for (const auto& tree : model.forest.trees) {
                votes += static_cast<std::size_t>(tree.vote(scaled));
            }
            return static_cast<double>(votes) / static_cast<double>(model.forest.trees.size());
        }
        case ModelKind::knn:
            return predict_knn(model.knn, model.hyper.knn_k, scaled);
        default:
            return predict_gnb(model.gnb, scaled);
    }
}

EvalMetrics evaluate(const TrainedModel& model, const FeatureMatrix& test, double threshold) {
    if (test.n_rows == 0) {
        throw DataError("evaluation set is empty");
    }
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < test.n_rows; ++i) {
        double score = predict_proba(model, test.row(i));
        bool predicted_abnormal = score > threshold;
        bool is_abnormal = test.labels[i] == 1;
        if (predicted_abnormal && is_abnormal) ++tp;
        else if (predicted_abnormal && !is_abnormal) ++fp;
        else if (!predicted_abnormal && is_abnormal) ++fn;
        else ++tn;
    }
    return metrics_from_counts(tp, fp, tn, fn);
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& matrix, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.names = matrix.names;
    out.n_cols = matrix.n_cols;
    out.n_rows = rows.size();
    out.values.reserve(rows.size() * matrix.n_cols);
    out.labels.reserve(rows.size());
    for (std::size_t i : rows) {
        auto row = matrix.row(i);
        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(matrix.labels[i]);
    }
    return out;
}

} // namespace

CrossValResult cross_validate(ModelKind kind, const FeatureMatrix& matrix, std::size_t k,
                              const Hyperparams& hyper, std::uint64_t seed) {
    auto folds = stratified_fold_indices(matrix.labels, k, seed);
    CrossValResult result;
    double sum_p = 0.0, sum_r = 0.0, sum_f1 = 0.0, sum_acc = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<char> in_test(matrix.n_rows, 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(matrix.n_rows - folds[f].size());
        for (std::size_t i = 0; i < matrix.n_rows; ++i) {
            if (!in_test[i]) train_rows.push_back(i);
        }
        FeatureMatrix train_m = take_rows(matrix, train_rows);
        FeatureMatrix test_m = take_rows(matrix, folds[f]);
        TrainedModel model = train(kind, train_m, hyper, mix64(seed) + f);
        EvalMetrics m = evaluate(model, test_m, 0.5);
        sum_p += m.precision;
        sum_r += m.recall;
        sum_f1 += m.f1;
        sum_acc += m.accuracy;
        tp += m.tp; fp += m.fp; tn += m.tn; fn += m.fn;
        result.per_fold.push_back(m);
    }
    double nf = static_cast<double>(folds.size());
    result.mean.precision = sum_p / nf;
    result.mean.recall = sum_r / nf;
    result.mean.f1 = sum_f1 / nf;
    result.mean.accuracy = sum_acc / nf;
    result.mean.tp = tp;
    result.mean.fp = fp;
    result.mean.tn = tn;
    result.mean.fn = fn;
    return result;
}

} // namespace avp
