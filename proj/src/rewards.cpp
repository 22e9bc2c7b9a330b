#include "clc/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>

namespace clc {

double FuelModelCoeffs::ln_rate(double v, double a) const {
  double vp[4] = {1.0, v, v * v, v * v * v};
  double ap[4] = {1.0, a, a * a, a * a * a};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) s += k[i][j] * vp[i] * ap[j];
  }
  return s;
}

bool ego_collision(const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
                   const LaneGeometry& geometry) {
  const auto& ego_slot = vehicles[static_cast<int>(VehicleRole::Ego)];
  if (!ego_slot) throw std::runtime_error("world is missing role ego");
  const VehicleState& ego = *ego_slot;
  for (VehicleRole role : kAllRoles) {
    if (role == VehicleRole::Ego) continue;
    const auto& slot = vehicles[static_cast<int>(role)];
    if (!slot) continue;
    const VehicleState& other = *slot;
    bool shared = false;
    for (int lane = 0; lane < geometry.lane_count; ++lane) {
      if (occupies_lane(ego, lane, geometry) && occupies_lane(other, lane, geometry)) {
        shared = true;
        break;
      }
    }
    if (!shared) continue;
    const VehicleState& leader = (ego.x >= other.x) ? ego : other;
    const VehicleState& follower = (ego.x >= other.x) ? other : ego;
    if (gap(leader, follower) <= 0.0) return true;
  }
  return false;
}

double safety_reward(bool collision, double ego_advance, const RewardCoefficients& c) {
  if (collision) return -c.crash_penalty;
  return c.alpha * ego_advance + c.beta;
}

double target_gap_d_tar(const VehicleState& lead, const VehicleState& ego, double t,
                        double d0) {
  return (lead.x - ego.x) + (lead.vx - ego.vx) * t +
         0.5 * (lead.ax - ego.ax) * t * t + d0;
}

std::vector<std::pair<VehicleRole, VehicleRole>> warning_pairs(
    const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
    const LaneGeometry& geometry) {
  const auto& ego_slot = vehicles[static_cast<int>(VehicleRole::Ego)];
  if (!ego_slot) throw std::runtime_error("world is missing role ego");

  std::vector<std::pair<VehicleRole, VehicleRole>> pairs;  // (follower, leader)
  for (int lane : occupied_lanes(*ego_slot, geometry)) {
    std::vector<VehicleRole> chain;
    for (VehicleRole role : kAllRoles) {
      const auto& slot = vehicles[static_cast<int>(role)];
      if (slot && occupies_lane(*slot, lane, geometry)) chain.push_back(role);
    }
    std::stable_sort(chain.begin(), chain.end(), [&](VehicleRole a, VehicleRole b) {
      return vehicles[static_cast<int>(a)]->x < vehicles[static_cast<int>(b)]->x;
    });
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      pairs.emplace_back(chain[i], chain[i + 1]);
    }
  }
  return pairs;
}

WarningResult warning_penalty(
    const std::array<std::optional<VehicleState>, kRoleCount>& vehicles,
    const std::array<double, kRoleCount>& commanded_ax, double dt,
    const RewardCoefficients& c, const LaneGeometry& geometry) {
  WarningResult out;
  for (auto [follower_role, leader_role] : warning_pairs(vehicles, geometry)) {
    const VehicleState& follower = *vehicles[static_cast<int>(follower_role)];
    const VehicleState& leader = *vehicles[static_cast<int>(leader_role)];
    const double dx = gap(leader, follower);
    const double dv = follower.vx - leader.vx;
    const double da = follower.ax - leader.ax;
    const bool at_risk = dx <= c.min_distance + dv * dt + 0.5 * da * dt * dt;
    if (!at_risk) continue;
    const double required = leader.ax - c.safety_margin;
    if (commanded_ax[static_cast<int>(follower_role)] > required) {
      out.count += 1;
    }
  }
  out.penalty = -c.warning_penalty * out.count;
  return out;
}

double comfort_reward(const VehicleState& prev, const VehicleState& now, double dt,
                      const RewardCoefficients& c) {
  const double jx = (now.ax - prev.ax) / dt;
  const double jy = (now.ay - prev.ay) / dt;
  const double jerk = std::hypot(jx, jy);
  const double yaw = std::atan2(now.vy, now.vx) - std::atan2(prev.vy, prev.vx);
  return -c.jerk_coeff * jerk - c.yaw_coeff * std::abs(yaw);
}

double fuel_emissions_reward(const std::vector<VehicleState>& controlled,
                             const RewardCoefficients& c, const FuelModelCoeffs& fuel,
                             double dt, int* clamp_events) {
  double t_f = 0.0;
  for (const VehicleState& s : controlled) {
    // Longitudinal speed and acceleration drive the rate model.
    double ln_rate = fuel.ln_rate(s.vx, s.ax);
    if (ln_rate > c.fuel_ln_cap) {
      ln_rate = c.fuel_ln_cap;
      if (clamp_events) ++*clamp_events;
    }
    t_f += std::exp(ln_rate) * dt;
  }
  return -c.fuel_coeff * t_f;
}

double lateral_reward(double y_ego, double target_centerline,
                      const RewardCoefficients& c) {
  const double dev = std::abs(y_ego - target_centerline);
  if (dev <= 0.5) {
    const double off = dev - c.lateral_vertex;
    return c.lateral_quad * off * off + c.lateral_bonus;
  }
  return c.lateral_slope * dev;
}

TotalReward total_reward(const RewardBreakdown& parts) {
  return {parts.total(), parts};
}

namespace {

void hash_mix(std::uint64_t& h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xff;
    h *= 0x100000001b3ull;
  }
}

}  // namespace

std::uint64_t coefficients_hash(const RewardCoefficients& c, const FuelModelCoeffs& fuel) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : {c.alpha, c.beta, c.crash_penalty, c.warning_penalty, c.min_distance,
                   c.safety_margin, c.jerk_coeff, c.yaw_coeff, c.fuel_coeff,
                   c.fuel_ln_cap, c.lateral_slope, c.lateral_quad, c.lateral_bonus,
                   c.lateral_vertex}) {
    hash_mix(h, v);
  }
  for (const auto& row : fuel.k) {
    for (double v : row) hash_mix(h, v);
  }
  return h;
}

}  // namespace clc
