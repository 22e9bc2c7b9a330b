#include "clc/world.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

const char* role_name(VehicleRole role) {
  switch (role) {
    case VehicleRole::Ego: return "ego";
    case VehicleRole::Lead: return "lead";
    case VehicleRole::Lag: return "lag";
    case VehicleRole::Pre: return "pre";
    case VehicleRole::Sur1: return "sur1";
    case VehicleRole::Sur2: return "sur2";
  }
  return "?";
}

const char* composition_name(Composition c) {
  switch (c) {
    case Composition::CavCav: return "cav_cav";
    case Composition::HvCav: return "hv_cav";
    case Composition::CavHv: return "cav_hv";
    case Composition::HvHv: return "hv_hv";
  }
  return "?";
}

std::optional<Composition> composition_from_name(const std::string& name) {
  for (Composition c : kAllCompositions) {
    if (name == composition_name(c)) return c;
  }
  return std::nullopt;
}

bool lead_is_hv(Composition c) {
  return c == Composition::HvCav || c == Composition::HvHv;
}

bool lag_is_hv(Composition c) {
  return c == Composition::CavHv || c == Composition::HvHv;
}

const VehicleState& ScenarioInstance::vehicle(VehicleRole role) const {
  const auto& slot = vehicles[static_cast<int>(role)];
  if (!slot) {
    throw std::runtime_error(std::string("world is missing role ") + role_name(role));
  }
  return *slot;
}

namespace {

std::array<VehicleState, kRoleCount> nominal_layout(const InitialConditions& base,
                                                    const LaneGeometry& geometry) {
  const double cur = geometry.centerline(base.current_lane);
  const double tgt = geometry.centerline(base.target_lane);
  const double v = base.flow_speed;
  const double len = base.vehicle_length;
  const double L = base.spacing;

  auto make = [&](double x, double y) {
    VehicleState s;
    s.x = x;
    s.y = y;
    s.vx = v;
    s.length = len;
    return s;
  };

  std::array<VehicleState, kRoleCount> out;
  out[static_cast<int>(VehicleRole::Ego)] = make(base.ego_x, base.ego_y);
  // Lead/lag bracket the gap so its midpoint is abreast of the ego.
  out[static_cast<int>(VehicleRole::Lead)] = make(base.ego_x + L / 2.0, tgt);
  out[static_cast<int>(VehicleRole::Lag)] = make(base.ego_x - L / 2.0, tgt);
  out[static_cast<int>(VehicleRole::Pre)] = make(base.ego_x + L, cur);
  out[static_cast<int>(VehicleRole::Sur1)] = make(base.ego_x + 1.5 * L, tgt);
  out[static_cast<int>(VehicleRole::Sur2)] = make(base.ego_x - 1.5 * L, tgt);
  return out;
}

void reject_overlaps(const std::array<VehicleState, kRoleCount>& layout,
                     const LaneGeometry& geometry) {
  for (int i = 0; i < kRoleCount; ++i) {
    for (int j = 0; j < kRoleCount; ++j) {
      if (i == j) continue;
      const VehicleState& a = layout[i];
      const VehicleState& b = layout[j];
      if (a.x <= b.x) continue;  // evaluate each pair once, a as leader
      bool share_lane = false;
      for (int k = 0; k < geometry.lane_count; ++k) {
        if (occupies_lane(a, k, geometry) && occupies_lane(b, k, geometry)) {
          share_lane = true;
          break;
        }
      }
      if (share_lane && gap(a, b) <= 0.0) {
        throw std::invalid_argument("initial conditions contain overlapping vehicles");
      }
    }
  }
}

}  // namespace

ScenarioInstance sample_scenario(std::uint64_t seed, double p,
                                 const InitialConditions& base,
                                 const LaneGeometry& geometry,
                                 const ResetNoise& noise,
                                 std::optional<Composition> forced) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("adoption probability must lie in [0, 1]");
  }
  auto layout = nominal_layout(base, geometry);
  reject_overlaps(layout, geometry);

  Rng rng(seed);
  ScenarioInstance out;
  out.geometry = geometry;
  out.initial = base;
  out.rng_seed = seed;

  // Draw order is fixed: composition, lead adoption, lag adoption, then
  // per-vehicle noise in role order. Reordering would silently change every
  // seeded experiment.
  out.composition = forced ? *forced
                           : kAllCompositions[rng.uniform_int(kAllCompositions.size())];
  if (lead_is_hv(out.composition)) out.lead_adopted = rng.bernoulli(p);
  if (lag_is_hv(out.composition)) out.lag_adopted = rng.bernoulli(p);

  for (int i = 0; i < kRoleCount; ++i) {
    VehicleState s = layout[i];
    if (noise.enabled) {
      s.x += rng.uniform(noise.x_lo, noise.x_hi);
      s.y += rng.uniform(noise.y_lo, noise.y_hi);
      s.vx += rng.uniform(noise.v_lo, noise.v_hi);
    }
    out.vehicles[i] = s;
  }

  out.modes.fill(ControlMode::IdmControlled);
  auto set_mode = [&](VehicleRole r, ControlMode m) {
    out.modes[static_cast<int>(r)] = m;
  };
  set_mode(VehicleRole::Ego, ControlMode::AgentControlled);
  const bool lead_agent = !lead_is_hv(out.composition) || out.lead_adopted;
  const bool lag_agent = !lag_is_hv(out.composition) || out.lag_adopted;
  if (lead_agent) set_mode(VehicleRole::Lead, ControlMode::AgentControlled);
  if (lag_agent) set_mode(VehicleRole::Lag, ControlMode::AgentControlled);
  return out;
}

StateVector observe(const std::array<std::optional<VehicleState>, kRoleCount>& vehicles) {
  auto get = [&](VehicleRole role) -> const VehicleState& {
    const auto& slot = vehicles[static_cast<int>(role)];
    if (!slot) {
      throw std::runtime_error(std::string("world is missing role ") + role_name(role));
    }
    return *slot;
  };
  const VehicleState& ego = get(VehicleRole::Ego);
  const VehicleState& lead = get(VehicleRole::Lead);
  const VehicleState& lag = get(VehicleRole::Lag);
  const VehicleState& sur1 = get(VehicleRole::Sur1);
  const VehicleState& sur2 = get(VehicleRole::Sur2);

  StateVector s;
  s << ego.x, ego.y, ego.vx, ego.vy,
      lead.x, lead.y, lead.vx,
      lag.x, lag.y, lag.vx,
      sur1.x, sur1.y, sur1.vx,
      sur2.x, sur2.y, sur2.vx;
  return s;
}

StateVector observe(const ScenarioInstance& world) {
  // The preceding vehicle is simulated but deliberately not observed; the
  // observation is the five-block 16-vector and nothing else.
  for (VehicleRole role : kAllRoles) world.vehicle(role);
  return observe(world.vehicles);
}

bool occupies_lane(const VehicleState& v, int lane, const LaneGeometry& g) {
  return std::abs(v.y - g.centerline(lane)) < g.lane_width / 2.0;
}

std::vector<int> occupied_lanes(const VehicleState& v, const LaneGeometry& g) {
  std::vector<int> lanes;
  for (int k = 0; k < g.lane_count; ++k) {
    if (occupies_lane(v, k, g)) lanes.push_back(k);
  }
  return lanes;
}

}  // namespace clc
