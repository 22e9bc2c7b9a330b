#pragma once

#include "clc/optim.hpp"
#include "clc/replay.hpp"
#include "clc/trainer.hpp"

namespace clc {

// DDPG plus twin critics with a min-target, target-action smoothing noise and
// a delayed policy update.
class Td3Trainer : public Trainer {
 public:
  Td3Trainer(const AlgoHyperparams& hp, const ActionBounds& bounds, std::uint64_t seed);

  const char* name() const override { return "td3"; }
  int action_dim() const override { return dim_; }
  Eigen::VectorXd select_action(const StateVector& state, bool train_mode) override;
  void record(const StateVector& state, const Eigen::VectorXd& action, double reward,
              const StateVector& next_state, bool done, bool truncated) override;
  std::optional<LossReport> maybe_update() override;
  void set_action_mask(const Eigen::VectorXd& mask) override;
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  // r + gamma * (1 - done) * min(Q1t, Q2t)(s', clamp(mu_target(s') + noise)).
  // The noise rng is explicit so tests can pin the draw sequence.
  Eigen::VectorXd td_targets(const ReplayBuffer::Batch& batch, Rng& noise_rng) const;
  LossReport update_once();

  ReplayBuffer& replay() { return replay_; }
  BoundedActor& actor() { return actor_; }
  BoundedActor& actor_target() { return actor_target_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  Mlp& critic1_target() { return critic1_target_; }
  Mlp& critic2_target() { return critic2_target_; }
  long critic_update_count() const { return critic_updates_; }
  long actor_update_count() const { return actor_updates_; }
  const AlgoHyperparams& hyperparams() const { return hp_; }

 private:
  AlgoHyperparams hp_;
  int dim_;
  ActionBounds bounds_;
  Eigen::VectorXd mask_;
  BoundedActor actor_, actor_target_;
  Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  Adam actor_opt_, critic1_opt_, critic2_opt_;
  ReplayBuffer replay_;
  Rng expl_rng_, sample_rng_, smooth_rng_;
  long critic_updates_ = 0;
  long actor_updates_ = 0;
};

}  // namespace clc
