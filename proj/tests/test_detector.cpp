#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "avp/detector.hpp"
#include "avp/errors.hpp"
#include "avp/rng.hpp"
#include "test_util.hpp"

using namespace avp;

namespace {

// Hand-built nearest-neighbor model whose scores are fully controlled by the
// training labels around each query point.
TrainedModel knn_model(const std::vector<double>& xs, const std::vector<int>& labels, int k) {
    TrainedModel model;
    model.kind = ModelKind::knn;
    model.hyper.knn_k = k;
    model.feature_names = {"x"};
    model.scaler.mean = {0.0};
    model.scaler.stddev = {0.0};  // passthrough
    model.knn.n_cols = 1;
    model.knn.train_values = xs;
    model.knn.train_labels = labels;
    return model;
}

FeatureMatrix one_feature_matrix(const std::vector<double>& xs, const std::vector<int>& labels) {
    FeatureMatrix m;
    m.names = {"x"};
    m.n_cols = 1;
    m.n_rows = xs.size();
    m.values = xs;
    m.labels = labels;
    return m;
}

// Score arrays matching the published margin table: of 3,893 normals exactly
// 155 lie above 0.4 and 293 above 0.3; of 13,902 attacks none lie below 0.5
// and 26 below 0.6.
void margin_table_scores(std::vector<double>& normals, std::vector<double>& attacks) {
    normals.assign(3600, 0.1);
    normals.insert(normals.end(), 138, 0.35);
    normals.insert(normals.end(), 155, 0.45);
    attacks.assign(26, 0.55);
    attacks.insert(attacks.end(), 13876, 0.9);
}

} // namespace

TEST_CASE("detect: strict threshold rule") {
    // Cluster of 10 neighbors with 7 abnormal gives a score of exactly 0.7.
    std::vector<double> xs;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(0.001 * i);
        labels.push_back(i < 7 ? 1 : 0);
    }
    TrainedModel model = knn_model(xs, labels, 10);

    DetectorConfig config{0.5, &model};
    Verdict above = detect(config, std::vector<double>{0.0});
    CHECK(above.score == 0.7);
    CHECK(above.abnormal);

    DetectorConfig boundary{0.7, &model};
    Verdict at = detect(boundary, std::vector<double>{0.0});
    CHECK(at.score == 0.7);
    CHECK_FALSE(at.abnormal);  // score equal to the threshold stays Normal

    TrainedModel all_normal = knn_model({0.0, 1.0}, {0, 0}, 2);
    DetectorConfig zero{0.0, &all_normal};
    Verdict v = detect(zero, std::vector<double>{0.5});
    CHECK(v.score == 0.0);
    CHECK_FALSE(v.abnormal);
}

TEST_CASE("detect: threshold at the maximum score silences every alarm") {
    Rng rng(4);
    std::vector<double> xs;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        xs.push_back(rng.gaussian());
        labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
    }
    TrainedModel model = knn_model(xs, labels, 5);
    FeatureMatrix samples = one_feature_matrix(xs, labels);
    std::vector<double> scores = score_all(model, samples);
    double top = *std::max_element(scores.begin(), scores.end());
    DetectorConfig config{top, &model};
    for (std::size_t i = 0; i < samples.n_rows; ++i) {
        CHECK_FALSE(detect(config, samples.row(i)).abnormal);
    }
}

TEST_CASE("detector config validation") {
    TrainedModel model = knn_model({0.0, 1.0}, {0, 1}, 1);
    DetectorConfig bad_threshold{1.5, &model};
    CHECK_THROWS_AS(bad_threshold.validate(), std::invalid_argument);
    DetectorConfig missing_model{0.5, nullptr};
    CHECK_THROWS_AS(missing_model.validate(), std::invalid_argument);
    DetectorConfig ok{0.0, &model};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("score_distribution: constant class lands in the first bin") {
    TrainedModel model = knn_model({0.0, 1.0}, {0, 0}, 2);  // every score is 0
    std::vector<double> xs = {0.0, 0.2, 0.4, 0.6};
    FeatureMatrix m = one_feature_matrix(xs, {0, 0, 0, 1});
    auto [normal, abnormal] = score_distribution(model, m, 10);
    CHECK(normal.total == 3);
    CHECK(normal.counts[0] == 3);
    CHECK(abnormal.total == 1);
    CHECK(abnormal.counts[0] == 1);
}

TEST_CASE("score_distribution: hand binning of three scores") {
    // Three clusters of 20 training points each produce k=20 scores of
    // exactly 1/20, 3/20 and 19/20 at the cluster centers.
    std::vector<double> xs;
    std::vector<int> labels;
    auto add_cluster = [&](double center, int abnormal) {
        for (int i = 0; i < 20; ++i) {
            xs.push_back(center + 0.001 * i);
            labels.push_back(i < abnormal ? 1 : 0);
        }
    };
    add_cluster(0.0, 1);
    add_cluster(100.0, 3);
    add_cluster(200.0, 19);
    TrainedModel model = knn_model(xs, labels, 20);

    FeatureMatrix queries = one_feature_matrix({0.0, 100.0, 200.0}, {0, 0, 0});
    auto [normal, abnormal] = score_distribution(model, queries, 10);
    CHECK(normal.counts[0] == 1);  // 0.05
    CHECK(normal.counts[1] == 1);  // 0.15
    CHECK(normal.counts[9] == 1);  // 0.95
    CHECK(abnormal.total == 0);
}

TEST_CASE("score_distribution: class totals match the published fold sizes") {
    TrainedModel model = knn_model({0.0, 1.0}, {0, 1}, 1);
    std::vector<double> xs;
    std::vector<int> labels;
    for (int i = 0; i < 3893; ++i) {
        xs.push_back(0.0);
        labels.push_back(0);
    }
    for (int i = 0; i < 13902; ++i) {
        xs.push_back(1.0);
        labels.push_back(1);
    }
    FeatureMatrix m = one_feature_matrix(xs, labels);
    auto [normal, abnormal] = score_distribution(model, m, 50);
    CHECK(normal.total == 3893);
    CHECK(abnormal.total == 13902);
    std::size_t normal_sum = 0, abnormal_sum = 0;
    for (auto c : normal.counts) normal_sum += c;
    for (auto c : abnormal.counts) abnormal_sum += c;
    CHECK(normal_sum == normal.total);
    CHECK(abnormal_sum == abnormal.total);

    CHECK_THROWS_AS(score_distribution(model, m, 0), std::invalid_argument);
}

TEST_CASE("score of exactly one lands in the last bin") {
    TrainedModel model = knn_model({0.0, 1.0}, {1, 1}, 2);  // every score is 1
    FeatureMatrix m = one_feature_matrix({0.5}, {1});
    auto [normal, abnormal] = score_distribution(model, m, 10);
    CHECK(abnormal.counts[9] == 1);
}

TEST_CASE("margin_analysis: reproduces the published margin rows") {
    std::vector<double> normals, attacks;
    margin_table_scores(normals, attacks);

    MarginReport best = margin_analysis(normals, attacks, {0.4, 0.5});
    CHECK(best.normal_misclassified == 155);
    CHECK(best.attack_misclassified == 0);
    CHECK(best.fp_rate == doctest::Approx(0.0398).epsilon(1e-3));
    CHECK(best.fn_rate == 0.0);

    MarginReport wide = margin_analysis(normals, attacks, {0.3, 0.6});
    CHECK(wide.normal_misclassified == 293);
    CHECK(wide.attack_misclassified == 26);
    CHECK(wide.fn_rate == doctest::Approx(0.00187).epsilon(1e-3));
}

TEST_CASE("margin_analysis: degenerate full-width margin counts everything strict") {
    std::vector<double> normals = {0.0, 0.2, 0.8};
    std::vector<double> attacks = {0.1, 1.0};
    MarginReport r = margin_analysis(normals, attacks, {0.0, 1.0});
    CHECK(r.normal_misclassified == 2);  // scores strictly above 0
    CHECK(r.attack_misclassified == 1);  // scores strictly below 1
}

TEST_CASE("margin_analysis: brute-force counting example") {
    std::vector<double> normals = {0.1, 0.45, 0.3};
    std::vector<double> attacks = {0.9, 0.55};
    MarginReport r = margin_analysis(normals, attacks, {0.4, 0.5});
    CHECK(r.normal_misclassified == 1);
    CHECK(r.attack_misclassified == 0);
}

TEST_CASE("margin_analysis: matches a per-sample brute force on random arrays") {
    Rng rng(66);
    for (int round = 0; round < 500; ++round) {
        std::size_t n = 1 + rng.index(30);
        std::size_t a = 1 + rng.index(30);
        std::vector<double> normals, attacks;
        for (std::size_t i = 0; i < n; ++i) normals.push_back(rng.uniform());
        for (std::size_t i = 0; i < a; ++i) attacks.push_back(rng.uniform());
        double lo = rng.uniform();
        double hi = lo + (1.0 - lo) * rng.uniform();

        MarginReport r = margin_analysis(normals, attacks, {lo, hi});
        std::size_t fp = 0, fn = 0;
        for (double s : normals) fp += s > lo ? 1 : 0;
        for (double s : attacks) fn += s < hi ? 1 : 0;
        CHECK(r.normal_misclassified == fp);
        CHECK(r.attack_misclassified == fn);
        CHECK(static_cast<std::size_t>(std::llround(r.fp_rate * static_cast<double>(n))) == fp);
        CHECK(static_cast<std::size_t>(std::llround(r.fn_rate * static_cast<double>(a))) == fn);
    }
}

TEST_CASE("margin_analysis: widening the margin never reduces misclassification") {
    Rng rng(8);
    for (int round = 0; round < 100; ++round) {
        std::vector<double> normals, attacks;
        for (int i = 0; i < 25; ++i) normals.push_back(rng.uniform());
        for (int i = 0; i < 25; ++i) attacks.push_back(rng.uniform());
        double lo = 0.3 + 0.2 * rng.uniform();
        double hi = lo + 0.2 * rng.uniform();
        MarginReport inner = margin_analysis(normals, attacks, {lo, hi});
        MarginReport outer = margin_analysis(normals, attacks,
                                             {lo - 0.2 * rng.uniform(), hi + 0.2 * rng.uniform()});
        CHECK(outer.normal_misclassified >= inner.normal_misclassified);
        CHECK(outer.attack_misclassified >= inner.attack_misclassified);
    }
}

TEST_CASE("margin_analysis: error cases") {
    std::vector<double> some = {0.5};
    CHECK_THROWS_AS(margin_analysis({}, some, {0.4, 0.5}), DataError);
    CHECK_THROWS_AS(margin_analysis(some, {}, {0.4, 0.5}), DataError);
    CHECK_THROWS_AS(margin_analysis(some, some, {0.6, 0.5}), std::invalid_argument);
    std::vector<double> bad = {1.5};
    CHECK_THROWS_AS(margin_analysis(bad, some, {0.4, 0.5}), std::invalid_argument);
}

TEST_CASE("degenerate point margin agrees with hard-threshold evaluation") {
    Rng rng(14);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> normals, attacks;
        for (int i = 0; i < 30; ++i) normals.push_back(rng.uniform());
        for (int i = 0; i < 30; ++i) attacks.push_back(rng.uniform());
        double t = rng.uniform();
        MarginReport r = margin_analysis(normals, attacks, {t, t});
        std::size_t fp_eval = 0, fn_strict = 0;
        for (double s : normals) fp_eval += s > t ? 1 : 0;
        for (double s : attacks) fn_strict += s < t ? 1 : 0;
        CHECK(r.normal_misclassified == fp_eval);
        CHECK(r.attack_misclassified == fn_strict);
    }
}

TEST_CASE("tune_threshold: the published margins rank as published") {
    std::vector<double> normals, attacks;
    margin_table_scores(normals, attacks);
    TuneResult result = tune_threshold(normals, attacks);
    CHECK(result.winner.margin.lo == 0.4);
    CHECK(result.winner.margin.hi == 0.5);
    REQUIRE(result.ranked.size() == 4);
    // Zero-FN margins first, ordered by FP rate.
    CHECK(result.ranked[0].fn_rate == 0.0);
    CHECK(result.ranked[1].fn_rate == 0.0);
    CHECK(result.ranked[0].fp_rate <= result.ranked[1].fp_rate);
    CHECK(result.ranked[2].fn_rate > 0.0);

    // Head-to-head of the first two published rows.
    std::vector<Margin> pair = {{0.4, 0.5}, {0.3, 0.5}};
    TuneResult duel = tune_threshold(normals, attacks, pair);
    CHECK(duel.winner.margin.lo == 0.4);
    CHECK(duel.ranked[0].normal_misclassified == 155);
    CHECK(duel.ranked[1].normal_misclassified == 293);
}

TEST_CASE("tune_threshold: single candidate wins by default") {
    std::vector<double> normals = {0.2, 0.3};
    std::vector<double> attacks = {0.8};
    std::vector<Margin> one = {{0.45, 0.55}};
    TuneResult result = tune_threshold(normals, attacks, one);
    CHECK(result.winner.margin.lo == 0.45);
    CHECK(result.ranked.size() == 1);

    CHECK_THROWS_AS(tune_threshold(normals, attacks, std::vector<Margin>{}),
                    std::invalid_argument);
}
