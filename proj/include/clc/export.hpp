#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clc/metrics.hpp"

namespace clc {

// Episode indices belonging to a training stage. early/mid/late are disjoint
// 200-episode windows (start, center, end of the run); final-optimal is the
// single best-total-reward episode of the late window.
std::vector<int> stage_episodes(const std::string& stage,
                                const std::vector<EpisodeRecord>& records);

struct ExportResult {
  int episodes_written = 0;
  int episodes_missing = 0;
};

// Concatenates the recorded per-episode trajectory files of a stage into one
// stage-tagged CSV. Missing recordings are reported on stderr and skipped.
ExportResult export_trajectories(const std::filesystem::path& run_dir,
                                 const std::string& stage,
                                 const std::filesystem::path& out_file);

}  // namespace clc
