#include "clc/export.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "clc/config.hpp"

namespace clc {

namespace {

constexpr int kStageWindow = 200;

std::vector<int> window_indices(int n, int start, int count) {
  std::vector<int> out;
  const int lo = std::max(0, start);
  const int hi = std::min(n, start + count);
  out.reserve(static_cast<std::size_t>(std::max(0, hi - lo)));
  for (int i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

}  // namespace

std::vector<int> stage_episodes(const std::string& stage,
                                const std::vector<EpisodeRecord>& records) {
  const int n = static_cast<int>(records.size());
  if (stage == "early") return window_indices(n, 0, kStageWindow);
  if (stage == "mid") return window_indices(n, (n - kStageWindow) / 2, kStageWindow);
  if (stage == "late") return window_indices(n, n - kStageWindow, kStageWindow);
  if (stage == "final-optimal") {
    const std::vector<int> late = stage_episodes("late", records);
    if (late.empty()) return {};
    int best = late.front();
    for (int i : late) {
      if (records[static_cast<std::size_t>(i)].total_reward >
          records[static_cast<std::size_t>(best)].total_reward) {
        best = i;
      }
    }
    return {best};
  }
  throw UsageError("unknown stage " + stage +
                   " (expected early, mid, late, or final-optimal)");
}

ExportResult export_trajectories(const std::filesystem::path& run_dir,
                                 const std::string& stage,
                                 const std::filesystem::path& out_file) {
  const MetricsFile metrics = read_metrics_csv(run_dir / "metrics.csv");
  const std::vector<int> episodes = stage_episodes(stage, metrics.records);

  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_file.string());
  out << "stage,episode,step,role,x,y,vx,vy,ax,ay,r_safety,r_warning,r_comfort,"
         "r_fuel,r_lateral,termination\n";

  ExportResult result;
  for (int ep : episodes) {
    char name[32];
    std::snprintf(name, sizeof(name), "ep_%d.csv", ep);
    std::ifstream in(run_dir / "trajectories" / name, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "export: no recorded trajectory for episode %d\n", ep);
      ++result.episodes_missing;
      continue;
    }
    std::string line;
    std::getline(in, line);  // drop the per-episode header
    while (std::getline(in, line)) {
      if (!line.empty()) out << stage << ',' << line << "\n";
    }
    ++result.episodes_written;
  }
  return result;
}

}  // namespace clc
