#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "clc/config.hpp"
#include "clc/metrics.hpp"
#include "clc/trainer.hpp"

namespace clc {

// Trainers always see the fixed padded layout [ego_ax, ego_ay, lead_ax,
// lag_ax] with inactive slots masked to zero, so one network shape serves
// every composition; the environment receives the compact layout.
inline constexpr int kPaddedActionDim = 4;

ActionBounds padded_action_bounds(const EnvConfig& cfg);
Eigen::VectorXd padded_mask(const std::array<bool, 4>& active);
Eigen::VectorXd compact_action(const Eigen::VectorXd& padded,
                               const std::array<bool, 4>& active);

// Independent seed streams hanging off the run's master seed.
std::uint64_t trainer_seed(std::uint64_t master);
std::uint64_t episode_seed(std::uint64_t master, int episode);

struct TrainResult {
  std::filesystem::path run_dir;
  std::vector<EpisodeRecord> records;
};

// Full episode loop. Writes metrics.csv, checkpoints/, config.json, and
// (when enabled) trajectories/ep_N.csv into run_dir. Deterministic in
// (config, seed): two identical invocations produce byte-identical outputs.
// A non-finite training signal saves checkpoints/diagnostic.ckpt and throws.
TrainResult train(const RunConfig& cfg, const std::filesystem::path& run_dir);

}  // namespace clc
