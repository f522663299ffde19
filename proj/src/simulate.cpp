#include "avp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "avp/config.hpp"
#include "avp/errors.hpp"
#include "avp/rng.hpp"

namespace avp {

namespace {

// Channel ids for the per-(seed, step, channel) noise stream.
enum NoiseChannel : std::uint64_t {
    kLongitudinal = 0,
    kLateral = 1,
    kMeasured = 2,
    kDistance = 3,
    kYawRate = 4,
    kYawAngle = 5,
    kBurst = 6,
};

double steering_at(const Scenario& scenario, double t) {
    const SteeringSegment* active = nullptr;
    for (const auto& seg : scenario.steering) {
        if (seg.start <= t && (active == nullptr || seg.start >= active->start)) {
            active = &seg;
        }
    }
    if (active == nullptr) return 0.0;
    switch (active->kind) {
        case SteeringSegment::Kind::sinusoid:
            return active->amplitude *
                   std::sin(6.283185307179586476925286766559 * active->frequency * (t - active->start) +
                            active->phase);
        default:
            return active->value;
    }
}

double desired_speed_at(const Scenario& scenario, double t) {
    const SpeedSegment* active = nullptr;
    for (const auto& seg : scenario.speed) {
        if (seg.start <= t && (active == nullptr || seg.start >= active->start)) {
            active = &seg;
        }
    }
    return active == nullptr ? 0.0 : active->value;
}

// Scripted obstacle distance, or +inf when nothing is in range. An obstacle
// leaves the scene once its scripted distance reaches zero.
double true_obstacle_distance(const Scenario& scenario, double t) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& obs : scenario.obstacles) {
        if (t < obs.appear) continue;
        double d = obs.distance - obs.closing_speed * (t - obs.appear);
        if (d <= 0.0) continue;
        nearest = std::min(nearest, d);
    }
    return nearest;
}

struct StepRecord {
    TelemetryFrame frame;
    bool laser = false;
};

std::vector<StepRecord> simulate_loop(const VehicleParams& params, const Scenario& scenario,
                                      const AttackScript* attack) {
    params.validate();
    scenario.validate();
    if (attack != nullptr) attack->validate(scenario.duration);

    const StateSpace ss = system_matrices(params);
    const std::uint64_t seed = scenario.seed;
    const auto n_steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.dt));

    LateralState lat;
    KinematicState kin;
    double u = 0.0;  // longitudinal body speed
    double last_sensed = scenario.max_range;

    std::vector<StepRecord> records;
    records.reserve(n_steps);

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * scenario.dt;
        const double delta = std::clamp(steering_at(scenario, t),
                                        -params.steering_limit, params.steering_limit);
        const bool laser = attack != nullptr && attack->active_at(t);

        // Depth channel: scripted distance capped at sensor range, plus noise,
        // unless the laser corrupts the reading.
        double reading = std::min(true_obstacle_distance(scenario, t), scenario.max_range);
        double clean_sensed =
            std::max(0.0, reading + scenario.noise.distance * gaussian_at(seed, i, kDistance));
        double sensed = clean_sensed;
        if (laser) {
            switch (attack->mode) {
                case BlindingMode::dropout_to_max_range:
                    sensed = scenario.max_range;
                    break;
                case BlindingMode::frozen_last_value:
                    sensed = last_sensed;
                    break;
                case BlindingMode::noise_burst:
                    sensed = std::max(0.0, clean_sensed +
                                               attack->burst_std * gaussian_at(seed, i, kBurst));
                    break;
            }
        } else {
            last_sensed = clean_sensed;
        }

        const bool braking = sensed < scenario.braking_distance;
        const double v_des = braking ? 0.0 : desired_speed_at(scenario, t);
        const double throttle = std::clamp(scenario.kp * (v_des - u), 0.0, 100.0);
        const bool brake_active = (u - v_des) > scenario.brake_deadband;

        StepRecord rec;
        rec.laser = laser;
        rec.frame.t = t;
        rec.frame.arm = true;
        rec.frame.desired_speed = v_des;
        rec.frame.longitudinal_speed =
            u + scenario.noise.speed * gaussian_at(seed, i, kLongitudinal);
        rec.frame.lateral_speed =
            lat.vy + scenario.noise.speed * gaussian_at(seed, i, kLateral);
        rec.frame.measured_speed =
            std::hypot(u, lat.vy) + scenario.noise.speed * gaussian_at(seed, i, kMeasured);
        rec.frame.obstacle_distance = sensed;
        rec.frame.steering_angle = delta;
        rec.frame.yaw_angle =
            kin.psi + scenario.noise.yaw_angle * gaussian_at(seed, i, kYawAngle);
        rec.frame.yaw_rate = lat.r + scenario.noise.yaw_rate * gaussian_at(seed, i, kYawRate);
        rec.frame.throttle = throttle;
        rec.frame.label = laser ? Label::abnormal : Label::normal;
        records.push_back(rec);

        // Advance one step with the current derivatives.
        kin.beta = sideslip_angle(params, delta);
        kin.v = std::hypot(u, lat.vy);
        KinematicRates rates = kinematic_rates(params, kin);
        MotionDerivatives motion =
            motion_derivatives(params, u, lat.vy, kin.psi, lat.r, 0.0, 0.0, 0.0, delta);
        kin.x += scenario.dt * rates.x_dot;
        kin.y += scenario.dt * rates.y_dot;
        kin.X += scenario.dt * motion.X_dot;
        kin.Y += scenario.dt * motion.Y_dot;
        kin.psi += scenario.dt * lat.r;
        lat = predict_next_state(ss, lat, ControlInput{delta, 0.0}, scenario.dt);
        double accel = scenario.accel_gain * throttle / 100.0 -
                       (brake_active ? scenario.brake_decel : 0.0);
        u = std::max(0.0, u + scenario.dt * accel);
    }
    return records;
}

} // namespace

void Scenario::validate() const {
    if (!(dt > 0.0)) throw DataError("scenario timestep must be positive");
    if (!(duration >= dt)) throw DataError("scenario duration must cover at least one step");
    if (noise.speed < 0.0 || noise.yaw_rate < 0.0 || noise.distance < 0.0 || noise.yaw_angle < 0.0) {
        throw DataError("noise levels must be non-negative");
    }
    if (!(max_range > 0.0)) throw DataError("sensor range must be positive");
    if (braking_distance < 0.0) throw DataError("braking distance must be non-negative");
    for (const auto& obs : obstacles) {
        if (!(obs.distance > 0.0)) throw DataError("obstacle distance at appearance must be positive");
        if (obs.closing_speed < 0.0) throw DataError("obstacle closing speed must be non-negative");
        if (obs.appear < 0.0) throw DataError("obstacle appearance time must be non-negative");
    }
    for (const auto& seg : speed) {
        if (seg.value < 0.0) throw DataError("desired speed must be non-negative");
    }
}

BlindingMode blinding_mode_from_string(const std::string& name) {
    if (name == "dropout" || name == "dropout_to_max_range") return BlindingMode::dropout_to_max_range;
    if (name == "frozen" || name == "frozen_last_value") return BlindingMode::frozen_last_value;
    if (name == "burst" || name == "noise_burst") return BlindingMode::noise_burst;
    throw DataError("unknown blinding mode: " + name + " (expected dropout|frozen|burst)");
}

std::string to_string(BlindingMode mode) {
    switch (mode) {
        case BlindingMode::dropout_to_max_range: return "dropout";
        case BlindingMode::frozen_last_value: return "frozen";
        default: return "burst";
    }
}

void AttackScript::validate(double duration) const {
    double previous_end = -std::numeric_limits<double>::infinity();
    for (const auto& iv : intervals) {
        if (!(iv.start <= iv.end)) throw DataError("attack interval ends before it starts");
        if (iv.start < 0.0 || iv.end > duration) {
            throw DataError("attack interval lies outside the scenario duration");
        }
        if (iv.start <= previous_end) throw DataError("attack intervals overlap or are unsorted");
        previous_end = iv.end;
    }
    if (burst_std < 0.0) throw DataError("burst noise std must be non-negative");
}

bool AttackScript::active_at(double t) const {
    for (const auto& iv : intervals) {
        if (t >= iv.start && t <= iv.end) return true;
        if (iv.start > t) break;
    }
    return false;
}

std::vector<TelemetryFrame> run_scenario(const VehicleParams& params, const Scenario& scenario) {
    auto records = simulate_loop(params, scenario, nullptr);
    std::vector<TelemetryFrame> frames;
    frames.reserve(records.size());
    for (auto& rec : records) frames.push_back(rec.frame);
    return frames;
}

AttackRun run_attack_scenario(const VehicleParams& params, const Scenario& scenario,
                              const AttackScript& attack) {
    auto records = simulate_loop(params, scenario, &attack);
    AttackRun run;
    run.frames.reserve(records.size());
    run.log.samples.reserve(records.size());
    for (auto& rec : records) {
        run.frames.push_back(rec.frame);
        run.log.samples.push_back({rec.frame.t, rec.laser ? 1 : 0});
    }
    return run;
}

AttackRun inject_attack(std::vector<TelemetryFrame> frames, const AttackScript& attack,
                        std::uint64_t seed) {
    if (frames.empty()) {
        throw DataError("attack injection needs at least one frame");
    }
    const double t_first = frames.front().t;
    const double t_last = frames.back().t;
    double previous_end = -std::numeric_limits<double>::infinity();
    for (const auto& iv : attack.intervals) {
        if (!(iv.start <= iv.end)) throw DataError("attack interval ends before it starts");
        if (iv.end < t_first || iv.start > t_last) {
            throw DataError("attack interval lies outside the frames' time range");
        }
        if (iv.start <= previous_end) throw DataError("attack intervals overlap or are unsorted");
        previous_end = iv.end;
    }

    AttackRun run;
    run.log.samples.reserve(frames.size());
    double last_clean = frames.front().obstacle_distance;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        TelemetryFrame& frame = frames[i];
        bool laser = attack.active_at(frame.t);
        if (laser) {
            switch (attack.mode) {
                case BlindingMode::dropout_to_max_range:
                    frame.obstacle_distance = attack.max_range;
                    break;
                case BlindingMode::frozen_last_value:
                    frame.obstacle_distance = last_clean;
                    break;
                case BlindingMode::noise_burst:
                    frame.obstacle_distance = std::max(
                        0.0, frame.obstacle_distance +
                                 attack.burst_std * gaussian_at(seed, i, kBurst));
                    break;
            }
            frame.label = Label::abnormal;
        } else {
            last_clean = frame.obstacle_distance;
        }
        run.log.samples.push_back({frame.t, laser ? 1 : 0});
    }
    run.frames = std::move(frames);
    return run;
}

ScenarioFile load_scenario(const std::string& path) {
    KeyValueConfig cfg = parse_config_file(path);
    ScenarioFile file;
    Scenario& s = file.scenario;
    s.duration = cfg.get_double("duration", s.duration);
    s.dt = cfg.get_double("dt", s.dt);
    s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(s.seed)));
    s.braking_distance = cfg.get_double("braking_distance", s.braking_distance);
    s.max_range = cfg.get_double("max_range", s.max_range);
    s.kp = cfg.get_double("kp", s.kp);
    s.accel_gain = cfg.get_double("accel_gain", s.accel_gain);
    s.brake_decel = cfg.get_double("brake_decel", s.brake_decel);
    s.brake_deadband = cfg.get_double("brake_deadband", s.brake_deadband);
    s.noise.speed = cfg.get_double("noise_speed", s.noise.speed);
    s.noise.yaw_rate = cfg.get_double("noise_yaw_rate", s.noise.yaw_rate);
    s.noise.distance = cfg.get_double("noise_distance", s.noise.distance);
    s.noise.yaw_angle = cfg.get_double("noise_yaw_angle", s.noise.yaw_angle);

    file.attack.mode = blinding_mode_from_string(cfg.get("attack_mode", "dropout"));
    file.attack.burst_std = cfg.get_double("attack_burst_std", file.attack.burst_std);
    file.attack.max_range = s.max_range;

    auto section_double = [](const std::map<std::string, std::string>& section,
                             const std::string& key, double fallback) {
        auto it = section.find(key);
        return it == section.end() ? fallback : to_double(it->second, key);
    };

    for (const auto& [name, body] : cfg.sections) {
        if (name == "steering") {
            SteeringSegment seg;
            seg.start = section_double(body, "start", 0.0);
            std::string kind = body.count("kind") ? body.at("kind") : "constant";
            if (kind == "constant") seg.kind = SteeringSegment::Kind::constant;
            else if (kind == "step") seg.kind = SteeringSegment::Kind::step;
            else if (kind == "sinusoid") seg.kind = SteeringSegment::Kind::sinusoid;
            else throw DataError(path + ": unknown steering kind '" + kind + "'");
            seg.value = section_double(body, "value", 0.0);
            seg.amplitude = section_double(body, "amplitude", 0.0);
            seg.frequency = section_double(body, "frequency", 0.0);
            seg.phase = section_double(body, "phase", 0.0);
            s.steering.push_back(seg);
        } else if (name == "speed") {
            SpeedSegment seg;
            seg.start = section_double(body, "start", 0.0);
            seg.value = section_double(body, "value", 0.0);
            s.speed.push_back(seg);
        } else if (name == "obstacle") {
            ObstacleEvent obs;
            obs.appear = section_double(body, "appear", 0.0);
            obs.distance = section_double(body, "distance", 0.0);
            obs.closing_speed = section_double(body, "closing_speed", 0.0);
            s.obstacles.push_back(obs);
        } else if (name == "attack") {
            AttackInterval iv;
            iv.start = section_double(body, "start", 0.0);
            iv.end = section_double(body, "end", 0.0);
            file.attack.intervals.push_back(iv);
            file.has_attack = true;
        } else {
            throw DataError(path + ": unknown section [" + name + "]");
        }
    }
    s.validate();
    if (file.has_attack) file.attack.validate(s.duration);
    return file;
}

} // namespace avp
