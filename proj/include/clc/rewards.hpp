#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "clc/world.hpp"

namespace clc {

// Defaults are calibrated so that settling onto the target centerline is the
// return optimum. Four properties pin them down:
//   - every per-step total is negative away from the target centerline, even
//     at the highest forward-progress rate sustainable inside the segment, so
//     neither parking, hovering, nor riding the edge of the success band
//     accumulates reward;
//   - the two lateral branches meet exactly at the 0.5 m boundary
//     (0.25 * quad + bonus = 0.5 * slope);
//   - the crash penalty exceeds the worst non-crash step total reachable
//     inside the action box, so a crash is always the strictly worst step;
//   - every road-exit path loses to deceleration-and-hold: the outer lateral
//     slope prices the overshoot leg past the target lane above the small
//     jerk cost of braking laterally, and the dive toward the near edge
//     crosses the highest-deviation region of the whole road.
struct RewardCoefficients {
  // safety
  double alpha = 0.1;           // forward-progress gain
  double beta = -0.25;          // per-step time penalty
  double crash_penalty = 150.0; // c, subtracted on collision
  // warning rule
  double warning_penalty = 5.0;  // w per triggered warning
  double min_distance = 2.0;     // d0 [m]
  double safety_margin = 0.5;    // a_s [m/s^2]
  // comfort
  double jerk_coeff = 0.01;  // b1
  double yaw_coeff = 1.0;    // b2
  // fuel / emissions
  double fuel_coeff = 0.01;  // kappa
  double fuel_ln_cap = 5.0;  // exponent guard for the log-polynomial rate
  // lateral deviation
  double lateral_slope = -4.0;   // omega, linear branch (negative)
  double lateral_quad = -8.0;    // varrho, quadratic branch curvature
  double lateral_bonus = 0.0;    // zeta, value at the vertex
  double lateral_vertex = 0.0;   // theta_lat, offset of the vertex from the centerline
};

// ln(fuel rate) = sum_ij k[i][j] * v^i * a^j, a VT-Micro-style log-polynomial.
// The default table is a documented placeholder, not a calibrated vehicle
// model: idle ~0.00045 L/s, mild growth in speed, stronger growth under
// positive acceleration.
struct FuelModelCoeffs {
  std::array<std::array<double, 4>, 4> k = {{
      {-7.7, 0.25, 0.0, 0.0},
      {0.08, 0.012, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0},
  }};

  double ln_rate(double v, double a) const;
};

struct RewardBreakdown {
  double safety = 0.0;
  double warning = 0.0;
  double comfort = 0.0;
  double fuel = 0.0;
  double lateral = 0.0;

  double total() const { return safety + warning + comfort + fuel + lateral; }
};

// Collision test: the ego longitudinally overlaps any vehicle sharing one of
// its occupied lanes. Background vehicles cannot crash into each other; only
// ego involvement terminates an episode.
bool ego_collision(const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
                   const LaneGeometry& geometry);

// -c on collision, otherwise alpha * (per-step longitudinal advance) + beta.
double safety_reward(bool collision, double ego_advance, const RewardCoefficients& c);

// Projected ego-to-leader distance after the elapsed maneuver time t,
// assuming both hold their current accelerations.
double target_gap_d_tar(const VehicleState& lead, const VehicleState& ego, double t,
                        double d0);

struct WarningResult {
  double penalty = 0.0;
  int count = 0;
};

// Adjacent follower/leader pairs in every lane the ego currently occupies,
// ordered rear to front. These are the pairs the collision-check rule scans.
std::vector<std::pair<VehicleRole, VehicleRole>> warning_pairs(
    const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
    const LaneGeometry& geometry);

// Collision-check rule: if a pair's gap will shrink to within d0 over the
// next step, the follower must command at least a_s less acceleration than
// its leader currently has; each violation costs -w.
WarningResult warning_penalty(
    const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
    const std::array<double, kRoleCount>& commanded_ax, double dt,
    const RewardCoefficients& c, const LaneGeometry& geometry);

// Jerk magnitude and heading change between two consecutive states of one
// controlled vehicle. Heading uses atan2, so vx = 0 is well defined.
double comfort_reward(const VehicleState& prev, const VehicleState& now, double dt,
                      const RewardCoefficients& c);

// -kappa * sum over controlled vehicles of the instantaneous fuel rate
// integrated over the step. clamp_events, when given, counts exponent-cap
// hits.
double fuel_emissions_reward(const std::vector<VehicleState>& controlled,
                             const RewardCoefficients& c, const FuelModelCoeffs& fuel,
                             double dt, int* clamp_events = nullptr);

// Quadratic bowl within half a meter of the target centerline, linear decay
// outside. The boundary belongs to the quadratic branch.
double lateral_reward(double y_ego, double target_centerline,
                      const RewardCoefficients& c);

struct TotalReward {
  double value = 0.0;
  RewardBreakdown breakdown;
};

TotalReward total_reward(const RewardBreakdown& parts);

// FNV-1a over the serialized coefficient set; embedded in metrics output so
// runs are attributable to the exact reward configuration.
std::uint64_t coefficients_hash(const RewardCoefficients& c, const FuelModelCoeffs& fuel);

}  // namespace clc
