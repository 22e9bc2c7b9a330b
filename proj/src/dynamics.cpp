#include "clc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clc {

VehicleState integrate_kinematics(const VehicleState& state, double ax, double ay,
                                  double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!std::isfinite(ax) || !std::isfinite(ay) || !std::isfinite(state.x) ||
      !std::isfinite(state.y) || !std::isfinite(state.vx) || !std::isfinite(state.vy)) {
    throw std::invalid_argument("non-finite kinematic input");
  }
  VehicleState next = state;
  next.x = state.x + state.vx * dt + 0.5 * ax * dt * dt;
  next.y = state.y + state.vy * dt + 0.5 * ay * dt * dt;
  next.vx = state.vx + ax * dt;
  next.vy = state.vy + ay * dt;
  next.ax = ax;
  next.ay = ay;
  return next;
}

double idm_free_acceleration(double v, const IdmParams& p) {
  const double a = p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.accel_exponent));
  return std::clamp(a, -p.max_brake, p.max_accel);
}

IdmResult idm_acceleration(double v, double delta_v, double s, const IdmParams& p) {
  if (!(s > 0.0)) {
    return {-p.max_brake, true};
  }
  const double interaction =
      v * p.time_gap + v * delta_v / (2.0 * std::sqrt(p.max_accel * p.comfort_decel));
  const double s_star = p.min_gap + std::max(0.0, interaction);
  const double ratio = s_star / s;
  const double a = p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.accel_exponent) -
                                  ratio * ratio);
  return {std::clamp(a, -p.max_brake, p.max_accel), false};
}

double idm_equilibrium_gap(double v, const IdmParams& p) {
  const double free_term = 1.0 - std::pow(v / p.desired_speed, p.accel_exponent);
  if (free_term <= 0.0) {
    throw std::invalid_argument("no equilibrium gap at or above the desired speed");
  }
  const double s_star = p.min_gap + std::max(0.0, v * p.time_gap);
  return s_star / std::sqrt(free_term);
}

Eigen::VectorXd clamp_action(const Eigen::VectorXd& a, const ActionBounds& bounds) {
  if (a.size() != bounds.low.size() || a.size() != bounds.high.size()) {
    throw std::invalid_argument("action/bounds dimension mismatch");
  }
  return a.cwiseMax(bounds.low).cwiseMin(bounds.high);
}

}  // namespace clc
