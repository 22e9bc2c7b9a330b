#include "clc/environment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace clc {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::Success: return "success";
    case Termination::Crash: return "crash";
    case Termination::OutOfBounds: return "out_of_bounds";
    case Termination::Timeout: return "timeout";
  }
  return "?";
}

int action_dim(const ScenarioInstance& scenario) {
  int dim = 2;
  if (scenario.agent_controlled(VehicleRole::Lead)) ++dim;
  if (scenario.agent_controlled(VehicleRole::Lag)) ++dim;
  return dim;
}

ActionBounds action_bounds_for(const ScenarioInstance& scenario, const EnvConfig& cfg) {
  const int dim = action_dim(scenario);
  ActionBounds b;
  b.low = Eigen::VectorXd(dim);
  b.high = Eigen::VectorXd(dim);
  b.low(0) = cfg.long_accel_min;
  b.high(0) = cfg.long_accel_max;
  b.low(1) = cfg.lat_accel_min;
  b.high(1) = cfg.lat_accel_max;
  for (int i = 2; i < dim; ++i) {
    b.low(i) = cfg.long_accel_min;
    b.high(i) = cfg.long_accel_max;
  }
  return b;
}

LaneChangeEnv::LaneChangeEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.episode.max_steps <= 0) {
    throw std::invalid_argument("max_steps must be positive");
  }
  if (!(cfg_.episode.success_lateral_tol > 0.0)) {
    throw std::invalid_argument("success_lateral_tol must be positive");
  }
  if (!(cfg_.episode.dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (cfg_.long_accel_min > cfg_.long_accel_max ||
      cfg_.lat_accel_min > cfg_.lat_accel_max) {
    throw std::invalid_argument("acceleration bounds are inverted");
  }
}

const ScenarioInstance& LaneChangeEnv::scenario() const {
  if (!scenario_) throw std::logic_error("environment used before reset");
  return *scenario_;
}

StateVector LaneChangeEnv::reset(std::uint64_t seed) {
  std::optional<Composition> forced;
  if (cfg_.fixed_composition) forced = cfg_.composition;
  scenario_ = sample_scenario(seed, cfg_.p_adopt, cfg_.initial, cfg_.geometry,
                              cfg_.noise, forced);
  vehicles_ = scenario_->vehicles;
  clock_ = SimClock{cfg_.episode.dt, 0};
  status_ = Termination::Running;
  success_streak_ = 0;
  has_reset_ = true;
  return observe(vehicles_);
}

int LaneChangeEnv::action_dim() const { return clc::action_dim(scenario()); }

ActionBounds LaneChangeEnv::action_bounds() const {
  return action_bounds_for(scenario(), cfg_);
}

std::array<bool, 4> LaneChangeEnv::action_mask() const {
  const ScenarioInstance& s = scenario();
  return {true, true, s.agent_controlled(VehicleRole::Lead),
          s.agent_controlled(VehicleRole::Lag)};
}

std::optional<VehicleRole> LaneChangeEnv::nearest_leader(VehicleRole role) const {
  const VehicleState& self = *vehicles_[static_cast<int>(role)];
  std::optional<VehicleRole> best;
  double best_dx = std::numeric_limits<double>::infinity();
  for (VehicleRole other : kAllRoles) {
    if (other == role) continue;
    const auto& slot = vehicles_[static_cast<int>(other)];
    if (!slot) continue;
    bool share = false;
    for (int k = 0; k < cfg_.geometry.lane_count; ++k) {
      if (occupies_lane(self, k, cfg_.geometry) &&
          occupies_lane(*slot, k, cfg_.geometry)) {
        share = true;
        break;
      }
    }
    if (!share || slot->x <= self.x) continue;
    const double dx = slot->x - self.x;
    if (dx < best_dx) {
      best_dx = dx;
      best = other;
    }
  }
  return best;
}

double LaneChangeEnv::idm_command(VehicleRole role) const {
  const VehicleState& self = *vehicles_[static_cast<int>(role)];
  const auto leader = nearest_leader(role);
  if (!leader) return idm_free_acceleration(self.vx, cfg_.idm);
  const VehicleState& ahead = *vehicles_[static_cast<int>(*leader)];
  const double s = gap(ahead, self);
  return idm_acceleration(self.vx, self.vx - ahead.vx, s, cfg_.idm).accel;
}

Termination LaneChangeEnv::evaluate_termination(bool crashed) {
  const VehicleState& ego = *vehicles_[static_cast<int>(VehicleRole::Ego)];
  if (crashed) return Termination::Crash;
  const double road_width = cfg_.geometry.lane_width * cfg_.geometry.lane_count;
  if (ego.x < 0.0 || ego.x > cfg_.geometry.road_length || ego.y < 0.0 ||
      ego.y > road_width) {
    return Termination::OutOfBounds;
  }
  if (std::abs(ego.y - target_centerline()) <= cfg_.episode.success_lateral_tol) {
    ++success_streak_;
  } else {
    success_streak_ = 0;
  }
  if (success_streak_ >= cfg_.episode.success_hold_steps) {
    return Termination::Success;
  }
  if (clock_.step_index >= cfg_.episode.max_steps) return Termination::Timeout;
  return Termination::Running;
}

StepOutcome LaneChangeEnv::step(const ActionVector& action) {
  if (!has_reset_) throw std::logic_error("step called before reset");
  if (status_ != Termination::Running) {
    throw std::logic_error("step called on a terminated episode");
  }
  const ScenarioInstance& sc = *scenario_;
  const int dim = clc::action_dim(sc);
  if (action.size() != dim) {
    throw std::invalid_argument("action dimension does not match the scenario");
  }
  const ActionVector a = clamp_action(action, action_bounds_for(sc, cfg_));
  const double dt = clock_.dt;

  // Commanded accelerations per role. The ego consumes slots 0 (longitudinal)
  // and 1 (lateral); agent-controlled lead/lag take the remaining slots in
  // that order; everyone else follows IDM behind its nearest same-lane leader.
  std::array<double, kRoleCount> ax{};
  std::array<double, kRoleCount> ay{};
  ax[static_cast<int>(VehicleRole::Ego)] = a(0);
  ay[static_cast<int>(VehicleRole::Ego)] = a(1);
  int slot = 2;
  for (VehicleRole role : {VehicleRole::Lead, VehicleRole::Lag}) {
    if (sc.agent_controlled(role)) {
      ax[static_cast<int>(role)] = a(slot++);
    }
  }
  for (VehicleRole role : kAllRoles) {
    const int i = static_cast<int>(role);
    if (!vehicles_[i]) continue;
    if (!sc.agent_controlled(role)) ax[i] = idm_command(role);
    // Braking saturates at a standstill: nobody reverses.
    ax[i] = std::max(ax[i], -vehicles_[i]->vx / dt);
  }

  const auto before = vehicles_;
  const WarningResult warned =
      warning_penalty(before, ax, dt, cfg_.rewards, cfg_.geometry);

  const double road_width = cfg_.geometry.lane_width * cfg_.geometry.lane_count;
  for (VehicleRole role : kAllRoles) {
    const int i = static_cast<int>(role);
    if (!vehicles_[i]) continue;
    VehicleState next = integrate_kinematics(*vehicles_[i], ax[i], ay[i], dt);
    // Lateral motion saturates at the pavement edges: the road is walled at
    // the sides, so episodes end longitudinally, by crash, or by settling.
    if (next.y <= 0.0) {
      next.y = 0.0;
      next.vy = std::max(next.vy, 0.0);
    } else if (next.y >= road_width) {
      next.y = road_width;
      next.vy = std::min(next.vy, 0.0);
    }
    *vehicles_[i] = next;
  }
  clock_.advance();

  const int ego_i = static_cast<int>(VehicleRole::Ego);
  const bool crashed = ego_collision(vehicles_, cfg_.geometry);
  const double advance = vehicles_[ego_i]->x - before[ego_i]->x;

  RewardBreakdown br;
  br.safety = safety_reward(crashed, advance, cfg_.rewards);
  br.warning = warned.penalty;
  std::vector<VehicleState> controlled;
  for (VehicleRole role : kAllRoles) {
    const int i = static_cast<int>(role);
    if (!vehicles_[i] || !sc.agent_controlled(role)) continue;
    br.comfort += comfort_reward(*before[i], *vehicles_[i], dt, cfg_.rewards);
    controlled.push_back(*vehicles_[i]);
  }
  br.fuel = fuel_emissions_reward(controlled, cfg_.rewards, cfg_.fuel, dt);
  br.lateral =
      lateral_reward(vehicles_[ego_i]->y, target_centerline(), cfg_.rewards);

  status_ = evaluate_termination(crashed);

  StepOutcome out;
  out.next_state = observe(vehicles_);
  out.breakdown = br;
  out.reward = br.total();
  out.terminated = status_;
  out.warnings_triggered = warned.count;
  return out;
}

}  // namespace clc
