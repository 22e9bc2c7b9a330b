#pragma once

#include <Eigen/Core>
#include <utility>

#include "clc/world.hpp"

namespace clc {

// Car-following parameters. Defaults match common highway calibrations.
struct IdmParams {
  double max_accel = 3.0;        // a1 [m/s^2]
  double desired_speed = 20.0;   // v0 [m/s]
  double min_gap = 2.0;          // s0 [m]
  double accel_exponent = 4.0;   // delta
  double time_gap = 1.0;         // T [s]
  double comfort_decel = 1.5;    // b1 [m/s^2]
  double max_brake = 6.0;        // emergency braking floor [m/s^2]
};

struct SimClock {
  double dt = 0.1;
  long step_index = 0;

  double elapsed() const { return dt * static_cast<double>(step_index); }
  void advance() { ++step_index; }
};

// Constant-acceleration update over one step. Exact, no integration error.
VehicleState integrate_kinematics(const VehicleState& state, double ax, double ay,
                                  double dt);

struct IdmResult {
  double accel = 0.0;
  bool emergency = false;  // non-positive gap, full braking applied
};

// Follower acceleration from speed v, closing speed delta_v (= v - v_leader)
// and net gap s. Result is clamped to [-max_brake, max_accel].
IdmResult idm_acceleration(double v, double delta_v, double s, const IdmParams& p);

// Free-road limit of the IDM (no leader in range).
double idm_free_acceleration(double v, const IdmParams& p);

// Net gap at which the IDM is in equilibrium at speed v (a = 0, delta_v = 0).
double idm_equilibrium_gap(double v, const IdmParams& p);

struct ActionBounds {
  Eigen::VectorXd low;
  Eigen::VectorXd high;
};

// Component-wise clamp; idempotent.
Eigen::VectorXd clamp_action(const Eigen::VectorXd& a, const ActionBounds& bounds);

}  // namespace clc
