#pragma once

#include <string>

namespace avp {

// Convention for the yaw-rate diagonal entry of the lateral state matrix.
// The two forms differ only in the sign between the front and rear
// l^2 * stiffness terms; both are exposed because they disagree for
// asymmetric vehicles.
enum class MatrixConvention { difference_form, sum_form };

// Convention for the body-to-global velocity projection. The default projects
// Y_dot with a minus cosine term; textbook_form uses the plus form.
enum class GlobalFrameConvention { minus_cos_form, textbook_form };

MatrixConvention matrix_convention_from_string(const std::string& name);
std::string to_string(MatrixConvention conv);

// Physical constants of the vehicle plus the nominal operating point.
// Defaults describe a small-scale testbed (2.7 kg, symmetric axles,
// unit cornering stiffness, 1 m/s nominal speed).
struct VehicleParams {
    double mass = 2.7;             // [kg]
    double lf = 0.16;              // center of mass to front axle [m]
    double lr = 0.16;              // center of mass to rear axle [m]
    double iz = 0.0441;            // yaw inertia [kg m^2]
    double c1 = 1.0;               // front cornering stiffness [N/rad]
    double c2 = 1.0;               // rear cornering stiffness [N/rad]
    double vx = 1.0;               // nominal longitudinal speed [m/s]
    double dt = 0.01;              // default integration step [s]
    double steering_limit = 0.5235987755982988;  // pi/6 [rad]
    MatrixConvention convention = MatrixConvention::difference_form;
    GlobalFrameConvention frame_convention = GlobalFrameConvention::minus_cos_form;

    void validate() const;  // throws std::invalid_argument
};

// Key-value file loader. Recognized keys: mass, lf, lr, iz, c1, c2, vx, dt,
// convention (difference|sum), steering_limit, textbook_kinematics.
// Missing keys keep the defaults above.
VehicleParams load_vehicle_params(const std::string& path);

// Lateral dynamic state: lateral velocity and yaw rate.
struct LateralState {
    double vy = 0.0;  // [m/s]
    double r = 0.0;   // [rad/s]
};

// Kinematic pose state. (x, y) are inertial coordinates integrated from the
// body rates, (X, Y) the global-frame projection, psi the yaw angle, beta the
// velocity-vector sideslip and v the speed magnitude.
struct KinematicState {
    double x = 0.0;
    double y = 0.0;
    double X = 0.0;
    double Y = 0.0;
    double psi = 0.0;   // [rad]
    double beta = 0.0;  // [rad]
    double v = 0.0;     // [m/s], >= 0
};

struct ControlInput {
    double delta = 0.0;  // steering angle [rad]
    double ax = 0.0;     // longitudinal acceleration [m/s^2]

    // Checks |delta| against a steering limit. Simulation clamps instead.
    void validate(double steering_limit) const;
};

// Per-wheel slip angles and tire forces plus the resulting net force and
// yaw torque. Longitudinal tire forces are zero under the linear tire model
// with aerodynamic resistance dropped.
struct TireState {
    double alpha_f = 0.0;  // front slip angle [rad]
    double alpha_r = 0.0;  // rear slip angle [rad]
    double f_yf = 0.0;     // front lateral force [N]
    double f_yr = 0.0;     // rear lateral force [N]
    double f_xf = 0.0;     // [N], zero by model simplification
    double f_xr = 0.0;     // [N], zero by model simplification
    double fx = 0.0;       // net longitudinal force [N]
    double fy = 0.0;       // net lateral force [N]
    double tau = 0.0;      // yaw torque [N m]
};

// Linearized lateral state space:
//   [vy_dot, r_dot]^T = [[A, B], [C, D]] [vy, r]^T + [E, F]^T * delta
struct StateSpace {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double D = 0.0;
    double E = 0.0;
    double F = 0.0;
    MatrixConvention convention = MatrixConvention::difference_form;
};

struct KinematicRates {
    double x_dot = 0.0;    // [m/s]
    double y_dot = 0.0;    // [m/s]
    double psi_dot = 0.0;  // [rad/s]
};

struct MotionDerivatives {
    double x_ddot = 0.0;  // body longitudinal acceleration [m/s^2]
    double y_ddot = 0.0;  // body lateral acceleration [m/s^2]
    double r_dot = 0.0;   // yaw acceleration [rad/s^2]
    double X_dot = 0.0;   // global-frame velocity [m/s]
    double Y_dot = 0.0;   // global-frame velocity [m/s]
};

// Sideslip of the velocity vector for a front steering angle:
// beta = atan(lr / (lf + lr) * tan(delta)).
double sideslip_angle(const VehicleParams& params, double delta);

// Pose rates from speed, heading and sideslip:
//   x_dot = v cos(psi + beta), y_dot = v sin(psi + beta),
//   psi_dot = v / lr * sin(beta)
KinematicRates kinematic_rates(const VehicleParams& params, const KinematicState& state);

// Slip angles and linear tire forces at the current lateral state and
// steering input. Rejects vx == 0.
TireState tire_forces(const VehicleParams& params, const LateralState& lat, const ControlInput& u);

// Newton-Euler accelerations and global-frame velocities with explicit body
// rates and tire forces. The typed overload derives those from the states.
MotionDerivatives motion_derivatives(const VehicleParams& params,
                                     double x_dot, double y_dot,
                                     double psi, double psi_dot,
                                     double ax, double f_yf, double f_yr, double delta);

MotionDerivatives full_derivatives(const VehicleParams& params,
                                   const KinematicState& kin,
                                   const LateralState& lat,
                                   const ControlInput& u);

// Lateral state-space matrices at the nominal operating point.
StateSpace system_matrices(const VehicleParams& params, MatrixConvention convention);
StateSpace system_matrices(const VehicleParams& params);

// Time derivative of the lateral state under the given matrices.
LateralState lateral_derivatives(const StateSpace& ss, const LateralState& lat, double delta);

// One explicit Euler step of the lateral dynamics. Rejects dt <= 0.
LateralState predict_next_state(const StateSpace& ss, const LateralState& lat,
                                const ControlInput& u, double dt);
LateralState predict_next_state(const VehicleParams& params, const LateralState& lat,
                                const ControlInput& u, double dt);

} // namespace avp
