#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "clc/environment.hpp"
#include "clc/trainer.hpp"

namespace clc {

// Configuration or command-line misuse; the CLI maps this to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
  int episodes = 5000;
  int checkpoint_every = 500;     // 0 disables periodic checkpoints (final kept)
  int eval_every = 0;             // 0 disables periodic evaluation
  bool record_trajectories = true;
  int trajectory_every = 1;       // record every k-th episode
};

struct RunConfig {
  EnvConfig env;
  std::string algo = "ppo";
  AlgoHyperparams hp;
  ScheduleConfig schedule;
  std::uint64_t seed = 1;
};

// Strict parse: every key must be known and well-typed, values land on the
// compiled-in defaults when absent. Throws UsageError with the offending path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved round-trippable form; written beside every run's outputs.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace clc
