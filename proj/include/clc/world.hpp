#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clc/rng.hpp"

namespace clc {

using StateVector = Eigen::Matrix<double, 16, 1>;

struct LaneGeometry {
  double road_length = 150.0;
  double lane_width = 3.75;
  int lane_count = 2;

  double centerline(int lane) const { return lane_width * (lane + 0.5); }
  double total_width() const { return lane_width * lane_count; }
};

struct VehicleState {
  double x = 0.0;   // longitudinal position [m]
  double y = 0.0;   // lateral position [m]
  double vx = 0.0;  // longitudinal speed [m/s]
  double vy = 0.0;  // lateral speed [m/s]
  double ax = 0.0;  // applied longitudinal acceleration [m/s^2]
  double ay = 0.0;  // applied lateral acceleration [m/s^2]
  double length = 5.0;
};

enum class VehicleRole { Ego = 0, Lead, Lag, Pre, Sur1, Sur2 };
inline constexpr int kRoleCount = 6;
inline constexpr std::array<VehicleRole, kRoleCount> kAllRoles = {
    VehicleRole::Ego,  VehicleRole::Lead, VehicleRole::Lag,
    VehicleRole::Pre,  VehicleRole::Sur1, VehicleRole::Sur2};

const char* role_name(VehicleRole role);

enum class ControlMode { AgentControlled, IdmControlled };

// Leader-follower typing of the target-lane gap. First name is the leader.
enum class Composition { CavCav = 0, HvCav, CavHv, HvHv };
inline constexpr std::array<Composition, 4> kAllCompositions = {
    Composition::CavCav, Composition::HvCav, Composition::CavHv,
    Composition::HvHv};

const char* composition_name(Composition c);
std::optional<Composition> composition_from_name(const std::string& name);

bool lead_is_hv(Composition c);
bool lag_is_hv(Composition c);

// Nominal unperturbed layout. The ego starts on the current-lane centerline;
// lead/lag bracket the adjacent target-lane gap symmetrically around it, and
// sur1/sur2 sit one spacing beyond them. The preceding vehicle is one spacing
// ahead of the ego in the current lane.
struct InitialConditions {
  double ego_x = 60.0;
  double ego_y = 1.875;
  double spacing = 30.0;
  double flow_speed = 15.0;
  double vehicle_length = 5.0;
  int current_lane = 0;
  int target_lane = 1;
};

struct ResetNoise {
  bool enabled = true;
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 0.5;
  double v_lo = 0.0, v_hi = 2.0;
};

struct ScenarioInstance {
  Composition composition = Composition::CavCav;
  bool lead_adopted = false;  // CMCR accepted by an HV leader
  bool lag_adopted = false;   // CMCR accepted by an HV follower
  std::array<std::optional<VehicleState>, kRoleCount> vehicles;
  std::array<ControlMode, kRoleCount> modes{};
  LaneGeometry geometry;
  InitialConditions initial;
  std::uint64_t rng_seed = 0;

  const VehicleState& vehicle(VehicleRole role) const;
  bool agent_controlled(VehicleRole role) const {
    return modes[static_cast<int>(role)] == ControlMode::AgentControlled;
  }
};

// Samples one episode start: composition (uniform unless forced), CMCR
// adoption of each HV with probability p, and additive uniform reset noise on
// x, y and longitudinal speed of every vehicle. Pure in the seed.
ScenarioInstance sample_scenario(std::uint64_t seed, double p,
                                 const InitialConditions& base,
                                 const LaneGeometry& geometry = {},
                                 const ResetNoise& noise = {},
                                 std::optional<Composition> forced = std::nullopt);

// Fixed 16-component observation (O1, l1, l2, s1, s2). Throws if a role is
// missing; the layout never varies with composition.
StateVector observe(const ScenarioInstance& world);
StateVector observe(const std::array<std::optional<VehicleState>, kRoleCount>& vehicles);

// Net longitudinal gap, rear bumper of leader to front bumper of follower.
// Negative means overlap.
inline double gap(const VehicleState& leader, const VehicleState& follower) {
  return leader.x - follower.x - leader.length;
}

// Half-lane membership: a vehicle occupies lane k iff its lateral position is
// strictly within half a lane width of that centerline.
bool occupies_lane(const VehicleState& v, int lane, const LaneGeometry& g);
std::vector<int> occupied_lanes(const VehicleState& v, const LaneGeometry& g);

}  // namespace clc
