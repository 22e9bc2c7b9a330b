#include "clc/utilities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace clc {

AlgoStats stats_from_records(const std::string& algo,
                             const std::vector<EpisodeRecord>& records, int window) {
  if (records.empty()) throw std::invalid_argument("no episode records");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  const std::size_t n = records.size();
  const std::size_t start = n > static_cast<std::size_t>(window)
                                ? n - static_cast<std::size_t>(window)
                                : 0;
  const double count = static_cast<double>(n - start);

  AlgoStats s;
  s.algo = algo;
  double steps_all = 0.0, steps_success = 0.0, comfort = 0.0, fuel = 0.0;
  int successes = 0, crashes = 0;
  for (std::size_t i = start; i < n; ++i) {
    const EpisodeRecord& r = records[i];
    steps_all += r.steps;
    if (r.termination == Termination::Success) {
      steps_success += r.steps;
      ++successes;
    }
    if (r.crashed) ++crashes;
    comfort += r.comfort_sum;
    fuel += r.fuel_sum;
  }
  s.completion_time =
      successes > 0 ? steps_success / successes : steps_all / count;
  s.crash_rate = crashes / count;
  s.comfort_cost = std::abs(comfort / count);
  s.fuel_cost = std::abs(fuel / count);
  return s;
}

std::vector<UtilityRow> compute_utilities(const std::vector<AlgoStats>& stats) {
  if (stats.size() < 2) {
    throw std::invalid_argument("utility normalization needs at least two algorithms");
  }
  const auto column = [&](auto getter) {
    double lo = getter(stats.front()), hi = lo;
    for (const AlgoStats& s : stats) {
      lo = std::min(lo, getter(s));
      hi = std::max(hi, getter(s));
    }
    return std::pair<double, double>{lo, hi};
  };
  const auto normalize = [](double x, std::pair<double, double> range) {
    const auto [lo, hi] = range;
    if (hi == lo) return 1.0;  // degenerate column: every algorithm scores 1
    return std::clamp((hi - x) / (hi - lo), 0.0, 1.0);
  };

  const auto time_r = column([](const AlgoStats& s) { return s.completion_time; });
  const auto crash_r = column([](const AlgoStats& s) { return s.crash_rate; });
  const auto comfort_r = column([](const AlgoStats& s) { return s.comfort_cost; });
  const auto fuel_r = column([](const AlgoStats& s) { return s.fuel_cost; });

  std::vector<UtilityRow> rows;
  rows.reserve(stats.size());
  for (const AlgoStats& s : stats) {
    UtilityRow row;
    row.algo = s.algo;
    row.u_t = normalize(s.completion_time, time_r);
    row.u_s = normalize(s.crash_rate, crash_r);
    row.u_c = normalize(s.comfort_cost, comfort_r);
    row.u_e = normalize(s.fuel_cost, fuel_r);
    rows.push_back(row);
  }
  return rows;
}

std::string format_utility_table(const std::vector<UtilityRow>& rows) {
  std::string out = "algorithm      U_t      U_s      U_c      U_e\n";
  for (const UtilityRow& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-9s %8.3f %8.3f %8.3f %8.3f\n", r.algo.c_str(),
                  r.u_t, r.u_s, r.u_c, r.u_e);
    out += buf;
  }
  return out;
}

}  // namespace clc
