#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "avp/classifiers.hpp"
#include "avp/rng.hpp"

namespace avp {

int Tree::vote(std::span<const double> row) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        node = row[static_cast<std::size_t>(n.feature)] <= n.threshold
                   ? static_cast<std::size_t>(n.left)
                   : static_cast<std::size_t>(n.right);
    }
    return nodes[node].abnormal_fraction > 0.5 ? 1 : 0;
}

namespace {

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
};

double gini(std::size_t abnormal, std::size_t total) {
    double p = static_cast<double>(abnormal) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& X, const Hyperparams& hyper, std::uint64_t tree_seed)
        : X_(X), hyper_(hyper), rng_(tree_seed) {
        mtry_ = hyper.rf_max_features > 0
                    ? std::min<std::size_t>(static_cast<std::size_t>(hyper.rf_max_features), X.n_cols)
                    : static_cast<std::size_t>(
                          std::ceil(std::sqrt(static_cast<double>(X.n_cols))));
    }

    Tree build() {
        std::vector<std::size_t> idx;
        idx.reserve(X_.n_rows);
        if (hyper_.rf_bootstrap) {
            for (std::size_t i = 0; i < X_.n_rows; ++i) idx.push_back(rng_.index(X_.n_rows));
        } else {
            idx.resize(X_.n_rows);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
        }
        Tree tree;
        grow(tree, idx, 0, idx.size(), 1);
        return tree;
    }

private:
    // Best split of idx[begin, end) on one feature. Candidate thresholds are
    // midpoints between consecutive distinct values; ascending scan keeps the
    // lowest threshold on impurity ties.
    void scan_feature(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
                      int feature, Split& best) const {
        std::size_t n = end - begin;
        scratch_.clear();
        scratch_.reserve(n);
        for (std::size_t i = begin; i < end; ++i) {
            scratch_.emplace_back(X_.at(idx[i], static_cast<std::size_t>(feature)), X_.labels[idx[i]]);
        }
        std::sort(scratch_.begin(), scratch_.end());
        std::size_t total_abnormal = 0;
        for (const auto& [v, label] : scratch_) total_abnormal += static_cast<std::size_t>(label);

        std::size_t left_abnormal = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_abnormal += static_cast<std::size_t>(scratch_[i].second);
            if (scratch_[i].first == scratch_[i + 1].first) continue;
            std::size_t nl = i + 1;
            std::size_t nr = n - nl;
            double impurity = (static_cast<double>(nl) * gini(left_abnormal, nl) +
                               static_cast<double>(nr) * gini(total_abnormal - left_abnormal, nr)) /
                              static_cast<double>(n);
            if (!best.found || impurity < best.impurity) {
                best.found = true;
                best.feature = feature;
                best.threshold = 0.5 * (scratch_[i].first + scratch_[i + 1].first);
                best.impurity = impurity;
            }
        }
    }

    void grow(Tree& tree, std::vector<std::size_t>& idx, std::size_t begin, std::size_t end,
              int depth) {
        std::size_t n = end - begin;
        std::size_t abnormal = 0;
        for (std::size_t i = begin; i < end; ++i) abnormal += static_cast<std::size_t>(X_.labels[idx[i]]);

        std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        tree.nodes[static_cast<std::size_t>(node_id)].abnormal_fraction =
            static_cast<double>(abnormal) / static_cast<double>(n);

        bool pure = abnormal == 0 || abnormal == n;
        bool depth_capped = hyper_.rf_max_depth > 0 && depth > hyper_.rf_max_depth;
        if (pure || depth_capped || n < static_cast<std::size_t>(hyper_.rf_min_samples_split)) {
            return;
        }

        // Draw the feature subsample, then scan it in ascending index order so
        // impurity ties resolve to the lowest feature. If every sampled feature
        // is constant within the node, fall back to the remaining features.
        std::vector<int> pool(X_.n_cols);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::size_t j = i + rng_.index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(mtry_));
        std::sort(pool.begin() + static_cast<std::ptrdiff_t>(mtry_), pool.end());

        Split best;
        for (std::size_t i = 0; i < mtry_; ++i) scan_feature(idx, begin, end, pool[i], best);
        for (std::size_t i = mtry_; i < pool.size() && !best.found; ++i) {
            scan_feature(idx, begin, end, pool[i], best);
        }
        if (!best.found) {
            return;  // constant features, stay a leaf
        }

        auto mid = std::stable_partition(
            idx.begin() + static_cast<std::ptrdiff_t>(begin),
            idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t i) {
                return X_.at(i, static_cast<std::size_t>(best.feature)) <= best.threshold;
            });
        std::size_t split_at = static_cast<std::size_t>(mid - idx.begin());

        tree.nodes[static_cast<std::size_t>(node_id)].feature = best.feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best.threshold;
        tree.nodes[static_cast<std::size_t>(node_id)].left =
            static_cast<std::int32_t>(tree.nodes.size());
        grow(tree, idx, begin, split_at, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].right =
            static_cast<std::int32_t>(tree.nodes.size());
        grow(tree, idx, split_at, end, depth + 1);
    }

    const FeatureMatrix& X_;
    const Hyperparams& hyper_;
    Rng rng_;
    std::size_t mtry_ = 0;
    mutable std::vector<std::pair<double, int>> scratch_;
};

} // namespace

// Trees are seeded independently of construction order, so per-tree results
// match a sequential build regardless of scheduling.
ForestParams train_forest(const FeatureMatrix& X, const Hyperparams& hyper, std::uint64_t seed) {
    ForestParams forest;
    forest.trees.reserve(static_cast<std::size_t>(hyper.rf_trees));
    for (int t = 0; t < hyper.rf_trees; ++t) {
        std::uint64_t tree_seed = mix64(seed ^ mix64(static_cast<std::uint64_t>(t) + 1));
        TreeBuilder builder(X, hyper, tree_seed);
        forest.trees.push_back(builder.build());
    }
    return forest;
}

} // namespace avp
