#pragma once

#include <cstdint>
#include <filesystem>

#include "clc/config.hpp"
#include "clc/environment.hpp"
#include "clc/trainer.hpp"

namespace clc {

struct EvalStats {
  int episodes = 0;
  int successes = 0;
  int crashes = 0;
  int timeouts = 0;
  double mean_steps = 0.0;             // over all episodes
  double mean_completion_steps = 0.0;  // successes only; mean_steps when none
  double crash_rate = 0.0;
  double success_rate = 0.0;
  double mean_comfort = 0.0;   // per-episode comfort reward sum
  double mean_fuel = 0.0;      // per-episode fuel reward sum
  double mean_warnings = 0.0;  // warnings per episode
  double mean_total_reward = 0.0;
};

// Noiseless policy rollouts; neither the trainer nor its buffers are touched
// beyond eval-mode action queries.
EvalStats evaluate(LaneChangeEnv& env, Trainer& trainer, int episodes,
                   std::uint64_t seed);

// Rebuilds the trainer described by cfg, loads the checkpoint (rejecting
// algorithm or architecture mismatches), and evaluates it on a fresh
// environment.
EvalStats evaluate_checkpoint(const RunConfig& cfg, const std::filesystem::path& ckpt,
                              int episodes, std::uint64_t seed);

}  // namespace clc
