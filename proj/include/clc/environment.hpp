#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>

#include "clc/dynamics.hpp"
#include "clc/rewards.hpp"
#include "clc/world.hpp"

namespace clc {

using ActionVector = Eigen::VectorXd;

enum class Termination { Running, Success, Crash, OutOfBounds, Timeout };

const char* termination_name(Termination t);

// Timeout keeps the infinite-horizon objective alive; everything else ends
// the trajectory for bootstrapping purposes as well.
inline bool terminal_for_bootstrap(Termination t) {
  return t == Termination::Success || t == Termination::Crash ||
         t == Termination::OutOfBounds;
}

struct EpisodeConfig {
  int max_steps = 200;
  double success_lateral_tol = 0.1;
  int success_hold_steps = 3;
  double dt = 0.1;
};

struct StepOutcome {
  StateVector next_state = StateVector::Zero();
  double reward = 0.0;
  RewardBreakdown breakdown;
  Termination terminated = Termination::Running;
  int warnings_triggered = 0;
};

struct EnvConfig {
  LaneGeometry geometry;
  InitialConditions initial;
  ResetNoise noise;
  IdmParams idm;
  RewardCoefficients rewards;
  FuelModelCoeffs fuel;
  double long_accel_min = -3.0;
  double long_accel_max = 3.0;
  double lat_accel_min = -3.0;
  double lat_accel_max = 3.0;
  double p_adopt = 0.5;
  bool fixed_composition = true;   // false samples uniformly per episode
  Composition composition = Composition::CavCav;
  EpisodeConfig episode;
};

// Number of commanded accelerations: two for the ego plus one per
// agent-controlled vehicle in the target-lane pair.
int action_dim(const ScenarioInstance& scenario);

// Compact action layout (a_egox, a_egoy[, a_lead][, a_lag]).
ActionBounds action_bounds_for(const ScenarioInstance& scenario, const EnvConfig& cfg);

// The lane-change MDP. One instance is single-threaded and stateful; all
// stochasticity is consumed at reset, so stepping is a pure function of the
// stored world and the action.
class LaneChangeEnv {
 public:
  explicit LaneChangeEnv(EnvConfig cfg);

  StateVector reset(std::uint64_t seed);
  StepOutcome step(const ActionVector& action);

  int action_dim() const;
  ActionBounds action_bounds() const;
  // Activity of the padded slots [ego_ax, ego_ay, lead_ax, lag_ax].
  std::array<bool, 4> action_mask() const;

  const EnvConfig& config() const { return cfg_; }
  const ScenarioInstance& scenario() const;
  const std::array<std::optional<VehicleState>, kRoleCount>& vehicles() const {
    return vehicles_;
  }
  Termination status() const { return status_; }
  long step_index() const { return clock_.step_index; }
  double target_centerline() const {
    return cfg_.geometry.centerline(cfg_.initial.target_lane);
  }

 private:
  double idm_command(VehicleRole role) const;
  std::optional<VehicleRole> nearest_leader(VehicleRole role) const;
  Termination evaluate_termination(bool crashed);

  EnvConfig cfg_;
  std::optional<ScenarioInstance> scenario_;
  std::array<std::optional<VehicleState>, kRoleCount> vehicles_;
  SimClock clock_;
  Termination status_ = Termination::Running;
  int success_streak_ = 0;
  bool has_reset_ = false;
};

}  // namespace clc
