#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "avp/errors.hpp"
#include "avp/manifest.hpp"
#include "avp/rng.hpp"
#include "avp/telemetry.hpp"
#include "test_util.hpp"

using namespace avp;

namespace {

TelemetryFrame frame_at(double t, Label label = Label::unlabeled) {
    TelemetryFrame f;
    f.t = t;
    f.label = label;
    return f;
}

std::vector<TelemetryFrame> random_frames(std::size_t n, Rng& rng) {
    std::vector<TelemetryFrame> frames;
    for (std::size_t i = 0; i < n; ++i) {
        TelemetryFrame f;
        f.t = static_cast<double>(i) * 0.01 + rng.uniform() * 0.001;
        f.arm = rng.uniform() > 0.2;
        f.desired_speed = rng.uniform() * 2.0;
        f.longitudinal_speed = rng.uniform() * 2.0;
        f.lateral_speed = rng.uniform() - 0.5;
        f.measured_speed = rng.uniform() * 2.0;
        f.obstacle_distance = rng.uniform() * 10.0;
        f.steering_angle = rng.uniform() - 0.5;
        f.yaw_angle = rng.uniform() * 6.0 - 3.0;
        f.yaw_rate = rng.uniform() - 0.5;
        f.throttle = rng.uniform() * 100.0;
        f.label = rng.uniform() > 0.5 ? Label::abnormal : Label::normal;
        frames.push_back(f);
    }
    return frames;
}

} // namespace

TEST_CASE("load_frames: single valid row parses identically") {
    testutil::TempDir tmp("load1");
    {
        std::ofstream out(tmp.file("one.csv"));
        out << "timestamp,arm,desired_speed,longitudinal_speed,lateral_speed,measured_speed,"
               "obstacle_distance,steering_angle,yaw_angle,yaw_rate,throttle\n";
        out << "1.5,1,1.0,0.9,0.01,0.92,3.5,0.05,0.2,0.03,42.5\n";
    }
    LoadReport report = load_frames(tmp.file("one.csv"));
    REQUIRE(report.frames.size() == 1);
    const TelemetryFrame& f = report.frames[0];
    CHECK(f.t == 1.5);
    CHECK(f.arm);
    CHECK(f.desired_speed == 1.0);
    CHECK(f.longitudinal_speed == 0.9);
    CHECK(f.lateral_speed == 0.01);
    CHECK(f.measured_speed == 0.92);
    CHECK(f.obstacle_distance == 3.5);
    CHECK(f.steering_angle == 0.05);
    CHECK(f.yaw_angle == 0.2);
    CHECK(f.yaw_rate == 0.03);
    CHECK(f.throttle == 42.5);
    CHECK(f.label == Label::unlabeled);
}

TEST_CASE("load_frames: missing column names the unresolved feature") {
    testutil::TempDir tmp("load2");
    {
        std::ofstream out(tmp.file("short.csv"));
        out << "timestamp,arm,desired_speed\n0.0,1,1.0\n";
    }
    CHECK_THROWS_WITH_AS(load_frames(tmp.file("short.csv")),
                         doctest::Contains("longitudinal_speed"), DataError);
}

TEST_CASE("load_frames: bad numeric reports row and column") {
    testutil::TempDir tmp("load3");
    {
        std::ofstream out(tmp.file("bad.csv"));
        out << "timestamp,arm,desired_speed,longitudinal_speed,lateral_speed,measured_speed,"
               "obstacle_distance,steering_angle,yaw_angle,yaw_rate,throttle\n";
        out << "0.0,1,1.0,0.9,0.0,0.9,3.5,0.0,0.0,0.0,50\n";
        out << "0.1,1,1.0,0.9,0.0,0.9,3.5,0.0,0.0,0.0,abc\n";
    }
    try {
        load_frames(tmp.file("bad.csv"));
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        std::string what = e.what();
        CHECK(what.find("row 2") != std::string::npos);
        CHECK(what.find("throttle") != std::string::npos);
    }
}

TEST_CASE("load_frames: custom column map resolves renamed headers") {
    testutil::TempDir tmp("load4");
    {
        std::ofstream out(tmp.file("renamed.csv"));
        out << "time_s,armed,v_des,vx,vy,v,dist,delta,psi,r,thr\n";
        out << "0.25,1,1,0.9,0,0.9,5,0,0,0,10\n";
    }
    ColumnMap map;
    map.columns["timestamp"] = "time_s";
    map.columns["arm"] = "armed";
    map.columns["desired_speed"] = "v_des";
    map.columns["longitudinal_speed"] = "vx";
    map.columns["lateral_speed"] = "vy";
    map.columns["measured_speed"] = "v";
    map.columns["obstacle_distance"] = "dist";
    map.columns["steering_angle"] = "delta";
    map.columns["yaw_angle"] = "psi";
    map.columns["yaw_rate"] = "r";
    map.columns["throttle"] = "thr";
    LoadReport report = load_frames(tmp.file("renamed.csv"), map);
    REQUIRE(report.frames.size() == 1);
    CHECK(report.frames[0].t == 0.25);
    CHECK(report.frames[0].obstacle_distance == 5.0);
}

TEST_CASE("load_frames: rows come back time-sorted, duplicates dropped with warning") {
    testutil::TempDir tmp("load5");
    {
        std::ofstream out(tmp.file("unsorted.csv"));
        out << "timestamp,arm,desired_speed,longitudinal_speed,lateral_speed,measured_speed,"
               "obstacle_distance,steering_angle,yaw_angle,yaw_rate,throttle\n";
        out << "0.2,1,1,0,0,0,1,0,0,0,0\n";
        out << "0.1,1,2,0,0,0,1,0,0,0,0\n";
        out << "0.2,1,3,0,0,0,1,0,0,0,0\n";
    }
    LoadReport report = load_frames(tmp.file("unsorted.csv"));
    REQUIRE(report.frames.size() == 2);
    CHECK(report.frames[0].t == 0.1);
    CHECK(report.frames[1].t == 0.2);
    CHECK(report.frames[1].desired_speed == 1.0);  // first occurrence kept
    CHECK(report.duplicate_timestamps_dropped == 1);
    CHECK(report.warnings.size() == 1);
}

TEST_CASE("load_frames: negative timestamp and out-of-range throttle rejected") {
    testutil::TempDir tmp("load6");
    {
        std::ofstream out(tmp.file("neg.csv"));
        out << "timestamp,arm,desired_speed,longitudinal_speed,lateral_speed,measured_speed,"
               "obstacle_distance,steering_angle,yaw_angle,yaw_rate,throttle\n";
        out << "-1.0,1,1,0,0,0,1,0,0,0,0\n";
    }
    CHECK_THROWS_AS(load_frames(tmp.file("neg.csv")), DataError);
    {
        std::ofstream out(tmp.file("thr.csv"));
        out << "timestamp,arm,desired_speed,longitudinal_speed,lateral_speed,measured_speed,"
               "obstacle_distance,steering_angle,yaw_angle,yaw_rate,throttle\n";
        out << "0.0,1,1,0,0,0,1,0,0,0,150\n";
    }
    CHECK_THROWS_AS(load_frames(tmp.file("thr.csv")), DataError);
}

TEST_CASE("write/load round trip preserves every numeric field bit-exactly") {
    testutil::TempDir tmp("roundtrip");
    Rng rng(99);
    std::vector<TelemetryFrame> frames = random_frames(64, rng);
    frames[7].yaw_angle = -2.2250738585072014e-308;  // subnormal-boundary value
    frames[8].lateral_speed = 0.1 + 0.2;             // classic rounding artifact

    write_frames(tmp.file("rt.csv"), frames);
    LoadReport report = load_frames(tmp.file("rt.csv"));
    REQUIRE(report.frames.size() == frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const TelemetryFrame& a = frames[i];
        const TelemetryFrame& b = report.frames[i];
        CHECK(a.t == b.t);
        CHECK(a.arm == b.arm);
        CHECK(a.desired_speed == b.desired_speed);
        CHECK(a.longitudinal_speed == b.longitudinal_speed);
        CHECK(a.lateral_speed == b.lateral_speed);
        CHECK(a.measured_speed == b.measured_speed);
        CHECK(a.obstacle_distance == b.obstacle_distance);
        CHECK(a.steering_angle == b.steering_angle);
        CHECK(a.yaw_angle == b.yaw_angle);
        CHECK(a.yaw_rate == b.yaw_rate);
        CHECK(a.throttle == b.throttle);
        CHECK(a.label == b.label);
    }
}

TEST_CASE("label_by_subset stamps every frame") {
    std::vector<TelemetryFrame> frames = {frame_at(0.0), frame_at(0.1), frame_at(0.2)};
    auto labeled = label_by_subset(frames, SubsetKind::normal);
    for (const auto& f : labeled) CHECK(f.label == Label::normal);
    auto attacked = label_by_subset(frames, SubsetKind::attack);
    for (const auto& f : attacked) CHECK(f.label == Label::abnormal);

    CHECK(label_by_subset({}, SubsetKind::normal).empty());
}

TEST_CASE("summarize: published subset sizes give the published class share") {
    // 45,001 normal + 16,119 and 27,856 abnormal rows.
    std::vector<TelemetryFrame> s1(45001, frame_at(0.0, Label::normal));
    std::vector<TelemetryFrame> s2(16119, frame_at(0.0, Label::abnormal));
    std::vector<TelemetryFrame> s3(27856, frame_at(0.0, Label::abnormal));
    DatasetSummary summary = summarize({{"s1", s1}, {"s2", s2}, {"s3", s3}});
    CHECK(summary.total_rows == 88976);
    CHECK(summary.total_normals == 45001);
    CHECK(summary.total_abnormals == 43975);
    CHECK(summary.normal_share == doctest::Approx(0.5057).epsilon(1e-4));
    CHECK(summary.normal_share + summary.abnormal_share == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("join_laser_log: exact and out-of-tolerance matches") {
    LaserLog log;
    log.samples = {{1.0, 1}};

    auto exact = join_laser_log({frame_at(1.0)}, log, 0.05);
    CHECK(exact.frames[0].label == Label::abnormal);
    CHECK(exact.unmatched == 0);

    LaserLog far_log;
    far_log.samples = {{1.3, 1}};
    auto missed = join_laser_log({frame_at(1.0)}, far_log, 0.05);
    CHECK(missed.frames[0].label == Label::unlabeled);  // prior label kept
    CHECK(missed.unmatched == 1);
}

TEST_CASE("join_laser_log: matches the brute-force nearest join on a grid") {
    std::vector<TelemetryFrame> frames;
    for (int i = 0; i <= 4; ++i) frames.push_back(frame_at(0.1 * i));
    LaserLog log;
    for (int i = 0; i <= 4; ++i) {
        log.samples.push_back({0.1 * i, (i == 2 || i == 3) ? 1 : 0});
    }
    auto joined = join_laser_log(frames, log, 0.05);
    std::vector<Label> expected = {Label::normal, Label::normal, Label::abnormal, Label::abnormal,
                                   Label::normal};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK(joined.frames[i].label == expected[i]);
    }

    // Brute force over random logs: per frame, scan every entry for the nearest.
    Rng rng(5);
    for (int round = 0; round < 50; ++round) {
        std::vector<TelemetryFrame> fs;
        double t = 0.0;
        for (int i = 0; i < 20; ++i) {
            t += rng.uniform() * 0.2;
            fs.push_back(frame_at(t));
        }
        LaserLog rl;
        double lt = 0.0;
        for (int i = 0; i < 15; ++i) {
            lt += rng.uniform() * 0.25;
            rl.samples.push_back({lt, rng.uniform() > 0.5 ? 1 : 0});
        }
        double tol = rng.uniform() * 0.1;
        auto fast = join_laser_log(fs, rl, tol);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const LaserSample* nearest = nullptr;
            double best = 1e300;
            for (const auto& s : rl.samples) {
                double gap = std::fabs(s.t - fs[i].t);
                if (gap < best) {  // earlier entry wins ties
                    best = gap;
                    nearest = &s;
                }
            }
            Label expect = Label::unlabeled;
            if (nearest != nullptr && best <= tol) {
                expect = nearest->state == 1 ? Label::abnormal : Label::normal;
            }
            CHECK(fast.frames[i].label == expect);
        }
    }
}

TEST_CASE("join_laser_log: warning flag above one percent unmatched") {
    std::vector<TelemetryFrame> frames;
    for (int i = 0; i < 200; ++i) frames.push_back(frame_at(0.01 * i));
    LaserLog log;
    log.samples = {{0.0, 0}};  // matches only the earliest frames
    auto joined = join_laser_log(frames, log, 0.005);
    CHECK(joined.unmatched == 199);
    CHECK(joined.unmatched_warning);

    LaserLog full;
    for (int i = 0; i < 200; ++i) full.samples.push_back({0.01 * i, 0});
    auto ok = join_laser_log(frames, full, 0.005);
    CHECK(ok.unmatched == 0);
    CHECK_FALSE(ok.unmatched_warning);
}

TEST_CASE("default_join_tolerance is half the median frame interval") {
    std::vector<TelemetryFrame> frames = {frame_at(0.0), frame_at(0.1), frame_at(0.2),
                                          frame_at(0.3)};
    CHECK(default_join_tolerance(frames) == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("laser log file round trip") {
    testutil::TempDir tmp("laser");
    LaserLog log;
    log.samples = {{0.0, 0}, {0.125, 1}, {0.25, 1}, {0.375, 0}};
    write_laser_log(tmp.file("log.csv"), log);
    LaserLog loaded = load_laser_log(tmp.file("log.csv"));
    REQUIRE(loaded.samples.size() == log.samples.size());
    for (std::size_t i = 0; i < log.samples.size(); ++i) {
        CHECK(loaded.samples[i].t == log.samples[i].t);
        CHECK(loaded.samples[i].state == log.samples[i].state);
    }

    {
        std::ofstream out(tmp.file("bad.csv"));
        out << "timestamp,laser_state\n0.0,2\n";
    }
    CHECK_THROWS_AS(load_laser_log(tmp.file("bad.csv")), DataError);
}

TEST_CASE("stratified folds: perfect divisibility gives one of each class per fold") {
    std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    auto folds = stratified_fold_indices(labels, 5, 42);
    REQUIRE(folds.size() == 5);
    for (const auto& fold : folds) {
        REQUIRE(fold.size() == 2);
        CHECK(labels[fold[0]] + labels[fold[1]] == 1);
    }
}

TEST_CASE("stratified folds: published dataset size partitions into 17795/17796") {
    std::vector<int> labels(88976, 0);
    for (std::size_t i = 45001; i < labels.size(); ++i) labels[i] = 1;
    auto folds = stratified_fold_indices(labels, 5, 0);
    std::multiset<std::size_t> sizes;
    for (const auto& fold : folds) sizes.insert(fold.size());
    CHECK(sizes.count(17795) == 4);
    CHECK(sizes.count(17796) == 1);
}

TEST_CASE("stratified folds: uneven small case") {
    std::vector<int> labels = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1};  // 7 normal, 3 abnormal
    auto folds = stratified_fold_indices(labels, 3, 9);
    for (const auto& fold : folds) {
        std::size_t abnormal = 0, normal = 0;
        for (std::size_t i : fold) (labels[i] == 1 ? abnormal : normal)++;
        CHECK(abnormal == 1);
        CHECK((normal == 2 || normal == 3));
    }
}

TEST_CASE("stratified folds: partition, stratification and determinism properties") {
    Rng rng(1234);
    for (int round = 0; round < 25; ++round) {
        std::size_t n = 20 + rng.index(200);
        std::vector<int> labels(n);
        std::size_t abnormal = 0;
        for (auto& l : labels) {
            l = rng.uniform() < 0.4 ? 1 : 0;
            abnormal += static_cast<std::size_t>(l);
        }
        if (abnormal < 2 || n - abnormal < 2) continue;
        std::size_t k = 2 + rng.index(std::min<std::size_t>(4, std::min(abnormal, n - abnormal) - 1));
        std::uint64_t seed = rng.next_u64();

        auto folds = stratified_fold_indices(labels, k, seed);
        std::vector<char> seen(n, 0);
        for (const auto& fold : folds) {
            for (std::size_t i : fold) {
                CHECK(i < n);
                CHECK(!seen[i]);
                seen[i] = 1;
            }
        }
        CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(n));

        for (const auto& fold : folds) {
            std::size_t fold_abnormal = 0;
            for (std::size_t i : fold) fold_abnormal += static_cast<std::size_t>(labels[i]);
            double expect_abnormal = static_cast<double>(abnormal) / static_cast<double>(k);
            double expect_normal = static_cast<double>(n - abnormal) / static_cast<double>(k);
            CHECK(std::fabs(static_cast<double>(fold_abnormal) - expect_abnormal) <= 1.0);
            CHECK(std::fabs(static_cast<double>(fold.size() - fold_abnormal) - expect_normal) <= 1.0);
        }

        auto again = stratified_fold_indices(labels, k, seed);
        CHECK(folds == again);
    }
}

TEST_CASE("stratified folds: error cases") {
    CHECK_THROWS_AS(stratified_fold_indices({0, 1, 0, 1}, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(stratified_fold_indices({0, 0, 0, 0}, 2, 0), DataError);
    CHECK_THROWS_AS(stratified_fold_indices({0, 0, 0, 1}, 2, 0), DataError);  // k > minority
}

TEST_CASE("stratified_kfold over frames rejects unlabeled input") {
    std::vector<TelemetryFrame> frames = {frame_at(0.0, Label::normal),
                                          frame_at(0.1, Label::abnormal), frame_at(0.2)};
    CHECK_THROWS_AS(stratified_kfold(frames, 2, 0), DataError);
}
