#pragma once

#include "clc/optim.hpp"
#include "clc/replay.hpp"
#include "clc/trainer.hpp"

namespace clc {

// Deterministic actor-critic with target networks and replay.
class DdpgTrainer : public Trainer {
 public:
  DdpgTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds, std::uint64_t seed);

  const char* name() const override { return "ddpg"; }
  int action_dim() const override { return dim_; }
  Eigen::VectorXd select_action(const StateVector& state, bool train_mode) override;
  void record(const StateVector& state, const Eigen::VectorXd& action, double reward,
              const StateVector& next_state, bool done, bool truncated) override;
  std::optional<LossReport> maybe_update() override;
  void set_action_mask(const Eigen::VectorXd& mask) override;
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  // r + gamma * (1 - done) * Q_target(s', mu_target(s')).
  Eigen::VectorXd td_targets(const ReplayBuffer::Batch& batch) const;
  LossReport update_once();

  ReplayBuffer& replay() { return replay_; }
  BoundedActor& actor() { return actor_; }
  BoundedActor& actor_target() { return actor_target_; }
  Mlp& critic() { return critic_; }
  Mlp& critic_target() { return critic_target_; }
  const AlgoHyperparams& hyperparams() const { return hp_; }

 private:
  AlgoHyperparams hp_;
  int dim_;
  ActionBounds bounds_;
  Eigen::VectorXd mask_;
  BoundedActor actor_, actor_target_;
  Mlp critic_, critic_target_;
  Adam actor_opt_, critic_opt_;
  ReplayBuffer replay_;
  Rng expl_rng_, sample_rng_;
};

}  // namespace clc
