#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "avp/features.hpp"

namespace avp {

enum class ModelKind { logistic_regression, random_forest, knn, gaussian_nb };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// Union of per-kind hyperparameters; each kind reads only its own block.
struct Hyperparams {
    // logistic regression: batch gradient descent on L2-regularized log-loss
    double lr_learning_rate = 0.1;
    int lr_epochs = 500;
    double lr_l2 = 1e-4;

    // random forest: bagged exact-split trees on Gini impurity
    int rf_trees = 100;
    int rf_max_depth = 0;           // 0 = unlimited
    int rf_min_samples_split = 2;
    int rf_max_features = 0;        // 0 = ceil(sqrt(n_features)) per split
    bool rf_bootstrap = true;

    // k-nearest neighbors on standardized features
    int knn_k = 5;

    // Gaussian naive Bayes variance floor, relative to the largest feature variance
    double gnb_var_floor = 1e-9;

    void validate(ModelKind kind) const;
};

struct LogisticParams {
    std::vector<double> weights;
    double bias = 0.0;
};

// Flattened binary decision tree. Leaves have feature == -1 and carry the
// abnormal fraction of their training samples.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double abnormal_fraction = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    // Leaf vote for the descended sample: 1 when abnormal holds the strict majority.
    int vote(std::span<const double> row) const;
};

struct ForestParams {
    std::vector<Tree> trees;
};

struct KnnParams {
    std::vector<double> train_values;  // standardized, row-major
    std::vector<int> train_labels;
    std::size_t n_cols = 0;
};

struct GnbParams {
    double prior_abnormal = 0.5;
    std::vector<double> mean_normal, var_normal;
    std::vector<double> mean_abnormal, var_abnormal;
};

// A trained binary scorer. Kind-specific blocks other than `kind`'s are
// empty. The scaler is fitted on the training matrix and applied before
// prediction, so persisted models are self-contained.
struct TrainedModel {
    static constexpr int kFormatVersion = 1;

    ModelKind kind = ModelKind::logistic_regression;
    Hyperparams hyper;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    FeatureStats scaler;
    std::map<std::string, std::string> provenance;  // free-form training context

    LogisticParams logistic;
    ForestParams forest;
    KnnParams knn;
    GnbParams gnb;
};

// Confusion counts and derived metrics with abnormal as the positive class.
// Precision and recall fall back to 0 on an empty denominator; f1 is always
// 2 P R / (P + R) of the computed values (0 when both are 0).
struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

EvalMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

// Deterministic supervised training. Rejects single-class and non-finite
// inputs. Identical (matrix, hyperparams, seed) produce identical models.
TrainedModel train(ModelKind kind, const FeatureMatrix& matrix,
                   const Hyperparams& hyper = Hyperparams(), std::uint64_t seed = 0);

// Degree-of-abnormality score in [0, 1]. Rejects dimension mismatches.
double predict_proba(const TrainedModel& model, std::span<const double> sample);

// Hard decisions via score > threshold (strict), confusion counts against
// the matrix labels.
EvalMetrics evaluate(const TrainedModel& model, const FeatureMatrix& test, double threshold);

struct CrossValResult {
    std::vector<EvalMetrics> per_fold;
    EvalMetrics mean;  // arithmetic mean of the metrics; counts are summed
};

// Stratified k-fold cross-validation at decision threshold 0.5. Training
// (including scaler fitting) sees only the k-1 training folds of each cycle.
CrossValResult cross_validate(ModelKind kind, const FeatureMatrix& matrix, std::size_t k,
                              const Hyperparams& hyper = Hyperparams(), std::uint64_t seed = 0);

// Versioned self-describing persistence. Loading a file whose format version
// is newer than kFormatVersion fails with a clear error.
void save_model(const std::string& path, const TrainedModel& model);
std::string model_to_json(const TrainedModel& model);
TrainedModel load_model(const std::string& path);

} // namespace avp
