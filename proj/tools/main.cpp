#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "clc/config.hpp"
#include "clc/evaluate.hpp"
#include "clc/export.hpp"
#include "clc/gradcheck.hpp"
#include "clc/train.hpp"
#include "clc/utilities.hpp"

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  std::string algo;
  int episodes = 0;
};

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  int episodes = 100;
  std::uint64_t seed = 12345;
};

struct UtilityArgs {
  std::vector<std::string> runs;
  int window = 100;
};

struct ExportArgs {
  std::string run;
  std::string stage;
  std::string out;
};

struct GradcheckArgs {
  int width = 64;
  std::uint64_t seed = 7;
  int samples = 400;
};

clc::RunConfig load_config_checked(const std::string& path) {
  if (!fs::exists(path)) throw clc::UsageError("config file not found: " + path);
  return clc::load_run_config(path);
}

int run_train(const TrainArgs& a) {
  clc::RunConfig cfg = load_config_checked(a.config);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.algo.empty()) {
    if (a.algo != "ddpg" && a.algo != "td3" && a.algo != "sac" && a.algo != "ppo") {
      throw clc::UsageError("--algo must be one of ddpg, td3, sac, ppo");
    }
    cfg.algo = a.algo;
  }
  if (a.episodes > 0) cfg.schedule.episodes = a.episodes;
  const fs::path run_dir =
      a.out.empty() ? fs::path("runs") / (cfg.algo + "-s" + std::to_string(cfg.seed))
                    : fs::path(a.out);
  const clc::TrainResult result = clc::train(cfg, run_dir);
  std::printf("run complete: %s (%zu episodes)\n", result.run_dir.string().c_str(),
              result.records.size());
  return 0;
}

int run_eval(const EvalArgs& a) {
  const fs::path ckpt(a.checkpoint);
  if (!fs::exists(ckpt)) throw clc::UsageError("checkpoint not found: " + a.checkpoint);
  fs::path config_path(a.config);
  if (config_path.empty()) {
    config_path = ckpt.parent_path().parent_path() / "config.json";
    if (!fs::exists(config_path)) {
      throw clc::UsageError("no --config given and " + config_path.string() +
                            " does not exist");
    }
  }
  const clc::RunConfig cfg = load_config_checked(config_path.string());
  const clc::EvalStats s = clc::evaluate_checkpoint(cfg, ckpt, a.episodes, a.seed);
  std::printf("episodes=%d success_rate=%.4f crash_rate=%.4f mean_steps=%.2f "
              "completion_steps=%.2f mean_reward=%.4f mean_warnings=%.3f\n",
              s.episodes, s.success_rate, s.crash_rate, s.mean_steps,
              s.mean_completion_steps, s.mean_total_reward, s.mean_warnings);
  return 0;
}

int run_utilities(const UtilityArgs& a) {
  if (a.runs.size() < 2) {
    throw clc::UsageError("utilities needs at least two --runs directories");
  }
  std::vector<clc::AlgoStats> stats;
  for (const std::string& run : a.runs) {
    const fs::path dir(run);
    if (!fs::exists(dir / "metrics.csv")) {
      throw clc::UsageError("no metrics.csv under " + run);
    }
    const clc::RunConfig cfg = load_config_checked((dir / "config.json").string());
    const clc::MetricsFile metrics = clc::read_metrics_csv(dir / "metrics.csv");
    stats.push_back(clc::stats_from_records(cfg.algo, metrics.records, a.window));
  }
  const auto rows = clc::compute_utilities(stats);
  std::fputs(clc::format_utility_table(rows).c_str(), stdout);
  return 0;
}

int run_export(const ExportArgs& a) {
  const fs::path run_dir(a.run);
  if (!fs::exists(run_dir / "metrics.csv")) {
    throw clc::UsageError("no metrics.csv under " + a.run);
  }
  const fs::path out = a.out.empty()
                           ? run_dir / ("trajectories_" + a.stage + ".csv")
                           : fs::path(a.out);
  const clc::ExportResult r = clc::export_trajectories(run_dir, a.stage, out);
  std::printf("exported %d episode(s) to %s (%d missing)\n", r.episodes_written,
              out.string().c_str(), r.episodes_missing);
  return 0;
}

int run_gradcheck(const GradcheckArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = clc::gradcheck_shipped_architectures(a.width, a.seed, a.samples);
  bool all_passed = true;
  double worst = 0.0;
  for (const auto& c : checks) {
    std::printf("%-20s max_rel_err=%.3e checked=%d skipped=%d %s\n", c.name.c_str(),
                c.report.max_rel_err, c.report.checked, c.report.skipped,
                c.report.passed ? "ok" : "FAIL");
    worst = std::max(worst, c.report.max_rel_err);
    all_passed = all_passed && c.report.passed;
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  std::printf("gradcheck %s: max_rel_err=%.3e over %zu architectures (%.2fs)\n",
              all_passed ? "passed" : "FAILED", worst, checks.size(), secs);
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative lane-change training harness"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one agent from a config file");
  train_cmd->add_option("--config", train_args.config, "run configuration file")
      ->required();
  train_cmd->add_option("--out", train_args.out, "output run directory");
  train_cmd->add_option("--seed", train_args.seed, "override the config seed");
  train_cmd->add_option("--algo", train_args.algo, "override the config algorithm");
  train_cmd->add_option("--episodes", train_args.episodes, "override episode count");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")
      ->required();
  eval_cmd->add_option("--config", eval_args.config,
                       "run config (default: config.json beside the checkpoints)");
  eval_cmd->add_option("--episodes", eval_args.episodes, "evaluation episodes");
  eval_cmd->add_option("--seed", eval_args.seed, "evaluation seed");

  UtilityArgs util_args;
  auto* util_cmd = app.add_subcommand("utilities", "normalized utility table of runs");
  util_cmd->add_option("--runs", util_args.runs, "run directories")->required();
  util_cmd->add_option("--window", util_args.window, "converged-episode window");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "export stage trajectories");
  export_cmd->add_option("--run", export_args.run, "run directory")->required();
  export_cmd->add_option("--stage", export_args.stage,
                         "early, mid, late, or final-optimal")
      ->required();
  export_cmd->add_option("--out", export_args.out, "output CSV path");

  GradcheckArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  grad_cmd->add_option("--width", grad_args.width, "hidden width to instantiate");
  grad_cmd->add_option("--seed", grad_args.seed, "init/input seed");
  grad_cmd->add_option("--samples", grad_args.samples,
                       "parameters checked per network (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "error: invalid command line\n");
    return 2;
  }

  try {
    if (train_cmd->parsed()) return run_train(train_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (util_cmd->parsed()) return run_utilities(util_args);
    if (export_cmd->parsed()) return run_export(export_args);
    if (grad_cmd->parsed()) return run_gradcheck(grad_args);
  } catch (const clc::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
