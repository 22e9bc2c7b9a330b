#pragma once

#include <string>
#include <vector>

#include "clc/metrics.hpp"

namespace clc {

// Raw per-algorithm costs entering the utility normalization. Every column is
// lower-is-better: completion time, crash rate, and the absolute values of
// the (negative) comfort and fuel reward sums.
struct AlgoStats {
  std::string algo;
  double completion_time = 0.0;
  double crash_rate = 0.0;
  double comfort_cost = 0.0;
  double fuel_cost = 0.0;
};

struct UtilityRow {
  std::string algo;
  double u_t = 0.0;  // efficiency
  double u_s = 0.0;  // safety
  double u_c = 0.0;  // comfort
  double u_e = 0.0;  // ecology
};

// Converged-window summary: mean steps over successful episodes (mean over
// all if none succeeded), crash fraction, |mean comfort sum|, |mean fuel sum|
// across the final `window` records.
AlgoStats stats_from_records(const std::string& algo,
                             const std::vector<EpisodeRecord>& records, int window);

// Column-wise min-max normalization U = (max - x) / (max - min), clipped to
// [0, 1]; a degenerate column (max == min) scores 1 for every algorithm.
// Throws std::invalid_argument with fewer than two algorithms.
std::vector<UtilityRow> compute_utilities(const std::vector<AlgoStats>& stats);

// Fixed-width human-readable table of one row per algorithm.
std::string format_utility_table(const std::vector<UtilityRow>& rows);

}  // namespace clc
