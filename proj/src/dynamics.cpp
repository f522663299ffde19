#include "avp/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "avp/config.hpp"
#include "avp/errors.hpp"

namespace avp {

MatrixConvention matrix_convention_from_string(const std::string& name) {
    if (name == "difference" || name == "difference_form") return MatrixConvention::difference_form;
    if (name == "sum" || name == "sum_form") return MatrixConvention::sum_form;
    throw std::invalid_argument("unknown matrix convention: " + name +
                                " (expected 'difference' or 'sum')");
}

std::string to_string(MatrixConvention conv) {
    return conv == MatrixConvention::difference_form ? "difference" : "sum";
}

void VehicleParams::validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("vehicle mass must be positive");
    if (!(iz > 0.0)) throw std::invalid_argument("yaw inertia must be positive");
    if (!(lf > 0.0)) throw std::invalid_argument("front axle distance must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("rear axle distance must be positive");
    if (vx == 0.0) throw std::invalid_argument("nominal longitudinal speed must be nonzero");
    if (!(dt > 0.0)) throw std::invalid_argument("timestep must be positive");
    if (!(steering_limit > 0.0)) throw std::invalid_argument("steering limit must be positive");
    if (!std::isfinite(mass) || !std::isfinite(lf) || !std::isfinite(lr) || !std::isfinite(iz) ||
        !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(vx)) {
        throw std::invalid_argument("vehicle parameters must be finite");
    }
}

VehicleParams load_vehicle_params(const std::string& path) {
    KeyValueConfig cfg = parse_config_file(path);
    VehicleParams p;
    p.mass = cfg.get_double("mass", p.mass);
    p.lf = cfg.get_double("lf", p.lf);
    p.lr = cfg.get_double("lr", p.lr);
    p.iz = cfg.get_double("iz", p.iz);
    p.c1 = cfg.get_double("c1", p.c1);
    p.c2 = cfg.get_double("c2", p.c2);
    p.vx = cfg.get_double("vx", p.vx);
    p.dt = cfg.get_double("dt", p.dt);
    p.steering_limit = cfg.get_double("steering_limit", p.steering_limit);
    if (cfg.has("convention")) {
        p.convention = matrix_convention_from_string(cfg.get("convention", ""));
    }
    if (cfg.get_bool("textbook_kinematics", false)) {
        p.frame_convention = GlobalFrameConvention::textbook_form;
    }
    p.validate();
    return p;
}

void ControlInput::validate(double steering_limit) const {
    if (std::fabs(delta) > steering_limit) {
        throw std::invalid_argument("steering angle exceeds the configured limit");
    }
}

double sideslip_angle(const VehicleParams& params, double delta) {
    return std::atan(params.lr / (params.lf + params.lr) * std::tan(delta));
}

KinematicRates kinematic_rates(const VehicleParams& params, const KinematicState& state) {
    KinematicRates rates;
    rates.x_dot = state.v * std::cos(state.psi + state.beta);
    rates.y_dot = state.v * std::sin(state.psi + state.beta);
    rates.psi_dot = state.v / params.lr * std::sin(state.beta);
    return rates;
}

TireState tire_forces(const VehicleParams& params, const LateralState& lat, const ControlInput& u) {
    if (params.vx == 0.0) {
        throw std::invalid_argument("tire slip angles are undefined at zero longitudinal speed");
    }
    TireState tire;
    tire.alpha_f = (lat.vy + params.lf * lat.r) / params.vx - u.delta;
    tire.alpha_r = (lat.vy - params.lr * lat.r) / params.vx;
    tire.f_yf = -params.c1 * tire.alpha_f;
    tire.f_yr = -params.c2 * tire.alpha_r;
    tire.f_xf = 0.0;
    tire.f_xr = 0.0;
    double cos_d = std::cos(u.delta);
    double sin_d = std::sin(u.delta);
    tire.fx = -tire.f_xf * cos_d - tire.f_yf * sin_d - tire.f_xr;
    tire.fy = tire.f_yf * cos_d - tire.f_xf * sin_d + tire.f_yr;
    tire.tau = params.lf * (tire.f_yf * cos_d - tire.f_xf * sin_d) - params.lr * tire.f_yr;
    return tire;
}

MotionDerivatives motion_derivatives(const VehicleParams& params,
                                     double x_dot, double y_dot,
                                     double psi, double psi_dot,
                                     double ax, double f_yf, double f_yr, double delta) {
    MotionDerivatives d;
    d.x_ddot = psi_dot * y_dot + ax;
    d.y_ddot = -psi_dot * x_dot + 2.0 / params.mass * (f_yf * std::cos(delta) + f_yr);
    d.r_dot = 2.0 / params.iz * (params.lf * f_yf - params.lr * f_yr);
    d.X_dot = x_dot * std::cos(psi) - y_dot * std::sin(psi);
    if (params.frame_convention == GlobalFrameConvention::textbook_form) {
        d.Y_dot = x_dot * std::sin(psi) + y_dot * std::cos(psi);
    } else {
        d.Y_dot = x_dot * std::sin(psi) - y_dot * std::cos(psi);
    }
    return d;
}

MotionDerivatives full_derivatives(const VehicleParams& params,
                                   const KinematicState& kin,
                                   const LateralState& lat,
                                   const ControlInput& u) {
    params.validate();
    TireState tire = tire_forces(params, lat, u);
    // Body rates: longitudinal speed at the operating point, lateral from the state.
    return motion_derivatives(params, params.vx, lat.vy, kin.psi, lat.r,
                              u.ax, tire.f_yf, tire.f_yr, u.delta);
}

StateSpace system_matrices(const VehicleParams& params, MatrixConvention convention) {
    if (params.vx == 0.0) {
        throw std::invalid_argument("state-space matrices are undefined at zero longitudinal speed");
    }
    if (!(params.mass > 0.0) || !(params.iz > 0.0)) {
        throw std::invalid_argument("mass and yaw inertia must be positive");
    }
    const double cyf = params.c1;
    const double cyr = params.c2;
    StateSpace ss;
    ss.convention = convention;
    ss.A = (cyf + cyr) / (params.mass * params.vx);
    ss.B = (params.lf * cyf - params.lr * cyr) / (params.mass * params.vx * params.vx);
    ss.C = (params.lf * cyf - params.lr * cyr) / params.iz;
    if (convention == MatrixConvention::sum_form) {
        ss.D = (params.lf * params.lf * cyf + params.lr * params.lr * cyr) / (params.iz * params.vx);
    } else {
        ss.D = (params.lf * params.lf * cyf - params.lr * params.lr * cyr) / (params.iz * params.vx);
    }
    ss.E = -cyf / (params.mass * params.vx);
    ss.F = -params.lf * cyf / params.iz;
    return ss;
}

StateSpace system_matrices(const VehicleParams& params) {
    return system_matrices(params, params.convention);
}

LateralState lateral_derivatives(const StateSpace& ss, const LateralState& lat, double delta) {
    LateralState d;
    d.vy = ss.A * lat.vy + ss.B * lat.r + ss.E * delta;
    d.r = ss.C * lat.vy + ss.D * lat.r + ss.F * delta;
    return d;
}

LateralState predict_next_state(const StateSpace& ss, const LateralState& lat,
                                const ControlInput& u, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("prediction timestep must be positive");
    }
    LateralState d = lateral_derivatives(ss, lat, u.delta);
    return {lat.vy + dt * d.vy, lat.r + dt * d.r};
}

LateralState predict_next_state(const VehicleParams& params, const LateralState& lat,
                                const ControlInput& u, double dt) {
    return predict_next_state(system_matrices(params), lat, u, dt);
}

} // namespace avp
