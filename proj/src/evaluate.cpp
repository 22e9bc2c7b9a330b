#include "clc/evaluate.hpp"

#include <stdexcept>

#include "clc/checkpoint.hpp"
#include "clc/train.hpp"

namespace clc {

EvalStats evaluate(LaneChangeEnv& env, Trainer& trainer, int episodes,
                   std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  EvalStats stats;
  stats.episodes = episodes;
  double steps_sum = 0.0, completion_sum = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    StateVector state = env.reset(derive_seed(seed, static_cast<std::uint64_t>(ep)));
    const std::array<bool, 4> active = env.action_mask();
    trainer.set_action_mask(padded_mask(active));
    double comfort = 0.0, fuel = 0.0, total = 0.0;
    int warnings = 0;
    Termination ending = Termination::Running;
    while (true) {
      const Eigen::VectorXd padded = trainer.select_action(state, false);
      const StepOutcome out = env.step(compact_action(padded, active));
      comfort += out.breakdown.comfort;
      fuel += out.breakdown.fuel;
      total += out.reward;
      warnings += out.warnings_triggered;
      state = out.next_state;
      if (out.terminated != Termination::Running) {
        ending = out.terminated;
        break;
      }
    }
    const double steps = static_cast<double>(env.step_index());
    steps_sum += steps;
    switch (ending) {
      case Termination::Success:
        ++stats.successes;
        completion_sum += steps;
        break;
      case Termination::Crash:
        ++stats.crashes;
        break;
      case Termination::Timeout:
        ++stats.timeouts;
        break;
      default:
        break;
    }
    stats.mean_comfort += comfort;
    stats.mean_fuel += fuel;
    stats.mean_warnings += warnings;
    stats.mean_total_reward += total;
  }
  const double n = static_cast<double>(episodes);
  stats.mean_steps = steps_sum / n;
  stats.mean_completion_steps =
      stats.successes > 0 ? completion_sum / stats.successes : stats.mean_steps;
  stats.crash_rate = stats.crashes / n;
  stats.success_rate = stats.successes / n;
  stats.mean_comfort /= n;
  stats.mean_fuel /= n;
  stats.mean_warnings /= n;
  stats.mean_total_reward /= n;
  return stats;
}

EvalStats evaluate_checkpoint(const RunConfig& cfg, const std::filesystem::path& ckpt,
                              int episodes, std::uint64_t seed) {
  const Checkpoint ck = Checkpoint::load(ckpt);
  auto trainer = make_trainer(cfg.algo, cfg.hp, padded_action_bounds(cfg.env),
                              trainer_seed(cfg.seed));
  trainer->load(ck);  // throws on algorithm or architecture mismatch
  LaneChangeEnv env(cfg.env);
  return evaluate(env, *trainer, episodes, seed);
}

}  // namespace clc
