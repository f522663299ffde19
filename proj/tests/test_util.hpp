#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "avp/dynamics.hpp"
#include "avp/simulate.hpp"

namespace testutil {

// Exact solution of the constant-coefficient linear system
//   x_dot = M x + g
// at time t, via truncated series for exp(Mt) and phi1(Mt) = sum z^k/(k+1)!.
// Test-only oracle, independent of the Euler integration under test.
struct Mat2 {
    double a, b, c, d;
};

inline Mat2 matmul(const Mat2& p, const Mat2& q) {
    return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d,
            p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
}

inline std::array<double, 2> exact_linear_solution(const avp::StateSpace& ss,
                                                   std::array<double, 2> x0, double input,
                                                   double t) {
    Mat2 m{ss.A * t, ss.B * t, ss.C * t, ss.D * t};
    Mat2 expm{1.0, 0.0, 0.0, 1.0};
    Mat2 phi1{1.0, 0.0, 0.0, 1.0};
    Mat2 power{1.0, 0.0, 0.0, 1.0};
    double factorial = 1.0;
    for (int k = 1; k <= 40; ++k) {
        power = matmul(power, m);
        factorial *= static_cast<double>(k);
        expm.a += power.a / factorial;
        expm.b += power.b / factorial;
        expm.c += power.c / factorial;
        expm.d += power.d / factorial;
        double phi_factorial = factorial * static_cast<double>(k + 1);
        phi1.a += power.a / phi_factorial;
        phi1.b += power.b / phi_factorial;
        phi1.c += power.c / phi_factorial;
        phi1.d += power.d / phi_factorial;
    }
    double gx = ss.E * input;
    double gy = ss.F * input;
    return {expm.a * x0[0] + expm.b * x0[1] + t * (phi1.a * gx + phi1.b * gy),
            expm.c * x0[0] + expm.d * x0[1] + t * (phi1.c * gx + phi1.d * gy)};
}

// Scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("avp_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string dir() const { return path_.string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

// The seeded synthetic benchmark: cruise at 1 m/s with periodic obstacle
// encounters; the laser blinds every other encounter. 20 000 frames at the
// default duration.
struct Benchmark {
    avp::VehicleParams params;
    avp::Scenario scenario;
    avp::AttackScript attack;
};

inline Benchmark make_benchmark(std::uint64_t seed, double duration = 200.0) {
    Benchmark b;
    b.scenario.duration = duration;
    b.scenario.dt = 0.01;
    b.scenario.seed = seed;
    b.scenario.speed.push_back({0.0, 1.0});
    for (double t = 10.0; t + 3.0 < duration; t += 20.0) {
        b.scenario.obstacles.push_back({t, 3.0, 1.0});
    }
    b.attack.mode = avp::BlindingMode::dropout_to_max_range;
    for (double t = 28.0; t + 8.0 < duration; t += 40.0) {
        b.attack.intervals.push_back({t, t + 8.0});
    }
    return b;
}

} // namespace testutil
