#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avp/dynamics.hpp"
#include "avp/telemetry.hpp"

namespace avp {

struct SteeringSegment {
    enum class Kind { constant, step, sinusoid };
    double start = 0.0;      // [s]
    Kind kind = Kind::constant;
    double value = 0.0;      // constant/step level [rad]
    double amplitude = 0.0;  // sinusoid [rad]
    double frequency = 0.0;  // sinusoid [Hz]
    double phase = 0.0;      // sinusoid [rad]
};

struct SpeedSegment {
    double start = 0.0;  // [s]
    double value = 0.0;  // desired speed [m/s]
};

// A scripted obstacle: appears at a distance and closes at a fixed rate.
// It leaves the scene once the scripted distance reaches zero.
struct ObstacleEvent {
    double appear = 0.0;         // [s]
    double distance = 0.0;       // distance at appearance [m]
    double closing_speed = 0.0;  // [m/s]
};

struct NoiseLevels {
    double speed = 0.01;      // std on the three speed channels [m/s]
    double yaw_rate = 0.005;  // [rad/s]
    double distance = 0.02;   // [m]
    double yaw_angle = 0.0;   // [rad]
};

// Scripted driving scenario for synthetic telemetry generation.
struct Scenario {
    double duration = 20.0;  // [s]
    double dt = 0.01;        // [s]
    std::uint64_t seed = 1;

    std::vector<SteeringSegment> steering;  // empty = zero steering
    std::vector<SpeedSegment> speed;        // empty = zero desired speed
    std::vector<ObstacleEvent> obstacles;
    NoiseLevels noise;

    double braking_distance = 0.5;  // brake when sensed distance drops below [m]
    double max_range = 10.0;        // depth sensor range [m]

    // proportional throttle law: throttle = clamp(kp * (v_des - v), 0, 100),
    // v_dot = accel_gain * throttle / 100; braking decelerates at brake_decel
    double kp = 50.0;
    double accel_gain = 2.0;       // [m/s^2] at full throttle
    double brake_decel = 2.5;      // [m/s^2]
    double brake_deadband = 0.02;  // [m/s]

    void validate() const;
};

enum class BlindingMode { dropout_to_max_range, frozen_last_value, noise_burst };

BlindingMode blinding_mode_from_string(const std::string& name);
std::string to_string(BlindingMode mode);

struct AttackInterval {
    double start = 0.0;  // [s], inclusive
    double end = 0.0;    // [s], inclusive
};

// Laser-on intervals plus how the blinded depth channel misbehaves.
struct AttackScript {
    std::vector<AttackInterval> intervals;  // non-overlapping, time-sorted
    BlindingMode mode = BlindingMode::dropout_to_max_range;
    double burst_std = 0.5;   // extra noise std for noise_burst [m]
    double max_range = 10.0;  // dropout reading for post-hoc injection [m]

    void validate(double duration) const;
    bool active_at(double t) const;
};

// Integrates the bicycle model under the scenario script and emits the full
// telemetry schema, all frames labeled normal. Channel noise is drawn from a
// per-(seed, step, channel) stream.
std::vector<TelemetryFrame> run_scenario(const VehicleParams& params, const Scenario& scenario);

struct AttackRun {
    std::vector<TelemetryFrame> frames;
    LaserLog log;  // one sample per frame timestamp
};

// Closed-loop variant: the depth channel is corrupted in the loop while the
// laser is on, so obstacle braking never triggers during blinding. Frames
// inside laser intervals are labeled abnormal. Noise draws match
// run_scenario step for step.
AttackRun run_attack_scenario(const VehicleParams& params, const Scenario& scenario,
                              const AttackScript& attack);

// Post-hoc injection into existing frames: corrupts the obstacle-distance
// channel inside each interval, labels those frames abnormal and emits the
// matching laser log. Does not alter the recorded speed response; use
// run_attack_scenario to generate data where braking consistently fails.
// Rejects intervals outside the frames' time range.
AttackRun inject_attack(std::vector<TelemetryFrame> frames, const AttackScript& attack,
                        std::uint64_t seed);

// Scenario/attack file loader. Top-level keys configure the scenario and the
// attack mode; repeated [steering], [speed], [obstacle] and [attack] sections
// define the programs.
struct ScenarioFile {
    Scenario scenario;
    AttackScript attack;  // empty interval list when the file scripts none
    bool has_attack = false;
};

ScenarioFile load_scenario(const std::string& path);

} // namespace avp
