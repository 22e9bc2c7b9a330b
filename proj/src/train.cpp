#include "clc/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "clc/evaluate.hpp"

namespace clc {

namespace {

constexpr std::uint64_t kTrainerSeedStream = 0x7261696e;  // trainer init + draws
constexpr std::uint64_t kEpisodeSeedStream = 0x657069;    // per-episode resets
constexpr std::uint64_t kEvalSeedStream = 0x6576616c;     // periodic eval probes
constexpr int kEvalProbeEpisodes = 20;

constexpr const char* kTrajectoryHeader =
    "episode,step,role,x,y,vx,vy,ax,ay,r_safety,r_warning,r_comfort,r_fuel,"
    "r_lateral,termination";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_rows(std::ofstream& out, int episode, long step,
                           const std::array<std::optional<VehicleState>, kRoleCount>& vs,
                           const RewardBreakdown& b, Termination t) {
  for (VehicleRole role : kAllRoles) {
    const VehicleState& v = *vs[static_cast<int>(role)];
    out << episode << ',' << step << ',' << role_name(role) << ',' << fmt(v.x) << ','
        << fmt(v.y) << ',' << fmt(v.vx) << ',' << fmt(v.vy) << ',' << fmt(v.ax) << ','
        << fmt(v.ay) << ',' << fmt(b.safety) << ',' << fmt(b.warning) << ','
        << fmt(b.comfort) << ',' << fmt(b.fuel) << ',' << fmt(b.lateral) << ','
        << termination_name(t) << "\n";
  }
}

bool finite_report(const LossReport& r) {
  return std::isfinite(r.critic_loss) && std::isfinite(r.actor_loss) &&
         std::isfinite(r.value_loss) && std::isfinite(r.alpha) &&
         std::isfinite(r.policy_entropy);
}

void save_diagnostic(Trainer& trainer, const std::filesystem::path& dir,
                     const std::string& why) {
  Checkpoint ck;
  trainer.save(ck);
  ck.put_string("diagnostic", why);
  ck.save(dir / "checkpoints" / "diagnostic.ckpt");
}

}  // namespace

ActionBounds padded_action_bounds(const EnvConfig& cfg) {
  ActionBounds b;
  b.low = Eigen::VectorXd(kPaddedActionDim);
  b.high = Eigen::VectorXd(kPaddedActionDim);
  b.low << cfg.long_accel_min, cfg.lat_accel_min, cfg.long_accel_min, cfg.long_accel_min;
  b.high << cfg.long_accel_max, cfg.lat_accel_max, cfg.long_accel_max, cfg.long_accel_max;
  return b;
}

Eigen::VectorXd padded_mask(const std::array<bool, 4>& active) {
  Eigen::VectorXd m(kPaddedActionDim);
  for (int i = 0; i < kPaddedActionDim; ++i) m(i) = active[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  return m;
}

Eigen::VectorXd compact_action(const Eigen::VectorXd& padded,
                               const std::array<bool, 4>& active) {
  if (padded.size() != kPaddedActionDim) {
    throw std::invalid_argument("padded action must have four components");
  }
  int dim = 0;
  for (bool a : active) dim += a ? 1 : 0;
  Eigen::VectorXd compact(dim);
  int k = 0;
  for (int i = 0; i < kPaddedActionDim; ++i) {
    if (active[static_cast<std::size_t>(i)]) compact(k++) = padded(i);
  }
  return compact;
}

std::uint64_t trainer_seed(std::uint64_t master) {
  return derive_seed(master, kTrainerSeedStream);
}

std::uint64_t episode_seed(std::uint64_t master, int episode) {
  return derive_seed(derive_seed(master, kEpisodeSeedStream),
                     static_cast<std::uint64_t>(episode));
}

TrainResult train(const RunConfig& cfg, const std::filesystem::path& run_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(run_dir);
  fs::create_directories(run_dir / "checkpoints");
  if (cfg.schedule.record_trajectories) fs::create_directories(run_dir / "trajectories");

  {
    std::ofstream out(run_dir / "config.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write resolved config");
    out << to_json(cfg).dump(2) << "\n";
  }

  LaneChangeEnv env(cfg.env);
  auto trainer = make_trainer(cfg.algo, cfg.hp, padded_action_bounds(cfg.env),
                              trainer_seed(cfg.seed));

  std::ofstream eval_out;
  if (cfg.schedule.eval_every > 0) {
    eval_out.open(run_dir / "eval.csv", std::ios::binary);
    eval_out << "episode,mean_steps,crash_rate,success_rate,mean_total_reward\n";
  }

  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.schedule.episodes));

  for (int ep = 0; ep < cfg.schedule.episodes; ++ep) {
    StateVector state = env.reset(episode_seed(cfg.seed, ep));
    const std::array<bool, 4> active = env.action_mask();
    trainer->set_action_mask(padded_mask(active));

    EpisodeRecord rec;
    rec.episode = ep;

    const bool recording = cfg.schedule.record_trajectories &&
                           ep % cfg.schedule.trajectory_every == 0;
    std::ofstream traj;
    if (recording) {
      char name[32];
      std::snprintf(name, sizeof(name), "ep_%d.csv", ep);
      traj.open(run_dir / "trajectories" / name, std::ios::binary);
      traj << kTrajectoryHeader << "\n";
      write_trajectory_rows(traj, ep, 0, env.vehicles(), RewardBreakdown{},
                            Termination::Running);
    }

    while (true) {
      const Eigen::VectorXd padded = trainer->select_action(state, true);
      const StepOutcome out = env.step(compact_action(padded, active));
      const bool done = terminal_for_bootstrap(out.terminated);
      const bool truncated = out.terminated == Termination::Timeout;
      trainer->record(state, padded, out.reward, out.next_state, done, truncated);

      rec.total_reward += out.reward;
      rec.safety_sum += out.breakdown.safety;
      rec.warning_sum += out.breakdown.warning;
      rec.comfort_sum += out.breakdown.comfort;
      rec.fuel_sum += out.breakdown.fuel;
      rec.lateral_sum += out.breakdown.lateral;
      rec.warning_count += out.warnings_triggered;

      if (recording) {
        write_trajectory_rows(traj, ep, env.step_index(), env.vehicles(),
                              out.breakdown, out.terminated);
      }

      try {
        if (const auto report = trainer->maybe_update()) {
          if (!finite_report(*report)) {
            save_diagnostic(*trainer, run_dir, "non-finite loss report");
            throw std::runtime_error("training halted: non-finite loss report");
          }
          rec.critic_loss += report->critic_loss;
          rec.actor_loss += report->actor_loss;
          rec.value_loss += report->value_loss;
          rec.alpha = report->alpha;
          rec.entropy += report->policy_entropy;
          ++rec.updates;
        }
      } catch (const std::runtime_error& e) {
        if (std::string(e.what()).rfind("training halted", 0) == 0) throw;
        save_diagnostic(*trainer, run_dir, e.what());
        throw std::runtime_error(std::string("training halted: ") + e.what());
      }

      state = out.next_state;
      if (out.terminated != Termination::Running) {
        rec.steps = static_cast<int>(env.step_index());
        rec.termination = out.terminated;
        rec.crashed = out.terminated == Termination::Crash;
        break;
      }
    }

    if (rec.updates > 0) {
      rec.critic_loss /= static_cast<double>(rec.updates);
      rec.actor_loss /= static_cast<double>(rec.updates);
      rec.value_loss /= static_cast<double>(rec.updates);
      rec.entropy /= static_cast<double>(rec.updates);
    }
    if (!std::isfinite(rec.total_reward)) {
      save_diagnostic(*trainer, run_dir, "non-finite episode return");
      throw std::runtime_error("training halted: non-finite episode return");
    }
    records.push_back(rec);

    if (cfg.schedule.checkpoint_every > 0 &&
        (ep + 1) % cfg.schedule.checkpoint_every == 0) {
      Checkpoint ck;
      trainer->save(ck);
      char name[32];
      std::snprintf(name, sizeof(name), "ep_%d.ckpt", ep + 1);
      ck.save(run_dir / "checkpoints" / name);
    }
    if (cfg.schedule.eval_every > 0 && (ep + 1) % cfg.schedule.eval_every == 0) {
      LaneChangeEnv probe_env(cfg.env);
      const EvalStats s = evaluate(probe_env, *trainer, kEvalProbeEpisodes,
                                   derive_seed(cfg.seed, kEvalSeedStream));
      eval_out << (ep + 1) << ',' << fmt(s.mean_steps) << ',' << fmt(s.crash_rate)
               << ',' << fmt(s.success_rate) << ',' << fmt(s.mean_total_reward) << "\n";
    }
  }

  {
    Checkpoint ck;
    trainer->save(ck);
    ck.save(run_dir / "checkpoints" / "final.ckpt");
  }
  write_metrics_csv(run_dir / "metrics.csv", records,
                    coefficients_hash(cfg.env.rewards, cfg.env.fuel));
  return {run_dir, records};
}

}  // namespace clc
