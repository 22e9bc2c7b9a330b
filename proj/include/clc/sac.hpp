#pragma once

#include "clc/gaussian.hpp"
#include "clc/optim.hpp"
#include "clc/replay.hpp"
#include "clc/trainer.hpp"

namespace clc {

// Entropy-regularized twin-critic actor-critic with a squashed Gaussian
// policy and an auto-tuned temperature.
class SacTrainer : public Trainer {
 public:
  SacTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds, std::uint64_t seed);

  const char* name() const override { return "sac"; }
  int action_dim() const override { return dim_; }
  Eigen::VectorXd select_action(const StateVector& state, bool train_mode) override;
  void record(const StateVector& state, const Eigen::VectorXd& action, double reward,
              const StateVector& next_state, bool done, bool truncated) override;
  std::optional<LossReport> maybe_update() override;
  void set_action_mask(const Eigen::VectorXd& mask) override;
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  struct NextSample {
    Eigen::MatrixXd actions;    // dim x n, masked
    Eigen::VectorXd log_probs;  // n, masked sums
  };
  // Policy draw for every next state; the seed pins the noise sequence.
  NextSample sample_next(const Eigen::MatrixXd& next_states, std::uint64_t seed) const;
  // r + gamma * (1 - done) * (min(Q1t, Q2t)(s', a') - alpha * log pi(a'|s')).
  Eigen::VectorXd td_targets(const ReplayBuffer::Batch& batch,
                             const NextSample& next) const;
  LossReport update_once();

  double alpha() const { return std::exp(log_alpha_(0)); }
  double target_entropy() const { return target_entropy_; }
  ReplayBuffer& replay() { return replay_; }
  GaussianHead& policy() { return policy_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  Mlp& critic1_target() { return critic1_target_; }
  Mlp& critic2_target() { return critic2_target_; }
  const AlgoHyperparams& hyperparams() const { return hp_; }

 private:
  AlgoHyperparams hp_;
  int dim_;
  ActionBounds bounds_;
  Eigen::VectorXd mask_;
  GaussianHead policy_;
  Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  Adam policy_opt_, critic1_opt_, critic2_opt_, alpha_opt_;
  Eigen::VectorXd log_alpha_;  // single entry, optimized in log space
  double target_entropy_ = 0.0;
  ReplayBuffer replay_;
  Rng expl_rng_, sample_rng_, next_noise_rng_, actor_noise_rng_;
};

}  // namespace clc
