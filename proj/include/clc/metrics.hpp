#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "clc/environment.hpp"

namespace clc {

// Shared smoothing window for reported reward curves; identical for every
// algorithm so the curves stay comparable.
inline constexpr int kRewardWindow = 50;

struct EpisodeRecord {
  int episode = 0;
  double total_reward = 0.0;
  double reward_ma = 0.0;  // trailing kRewardWindow mean, filled by the writer
  double safety_sum = 0.0;
  double warning_sum = 0.0;
  double comfort_sum = 0.0;
  double fuel_sum = 0.0;
  double lateral_sum = 0.0;
  int steps = 0;
  Termination termination = Termination::Timeout;
  int warning_count = 0;
  bool crashed = false;
  // Training diagnostics, averaged over the episode's parameter updates.
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double value_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
  long updates = 0;
};

// CSV layout: a `# reward_coefficients_hash:` comment line, a header row,
// then one row per episode. Doubles are printed with %.17g so a read/write
// round trip is value-exact and identical runs yield identical bytes.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpisodeRecord>& records,
                       std::uint64_t coefficients_hash);

struct MetricsFile {
  std::uint64_t coefficients_hash = 0;
  std::vector<EpisodeRecord> records;
};

MetricsFile read_metrics_csv(const std::filesystem::path& path);

}  // namespace clc
