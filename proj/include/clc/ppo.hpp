#pragma once

#include "clc/gaussian.hpp"
#include "clc/optim.hpp"
#include "clc/rollout.hpp"
#include "clc/trainer.hpp"

namespace clc {

// On-policy clipped-surrogate trainer with an unsquashed Gaussian policy
// (the environment clamps actions) and a separate state-value head.
class PpoTrainer : public Trainer {
 public:
  PpoTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds, std::uint64_t seed);

  const char* name() const override { return "ppo"; }
  int action_dim() const override { return dim_; }
  Eigen::VectorXd select_action(const StateVector& state, bool train_mode) override;
  void record(const StateVector& state, const Eigen::VectorXd& action, double reward,
              const StateVector& next_state, bool done, bool truncated) override;
  std::optional<LossReport> maybe_update() override;
  void set_action_mask(const Eigen::VectorXd& mask) override;
  void save(Checkpoint& ck) const override;
  void load(const Checkpoint& ck) override;

  // Mask-weighted log-density of stored (possibly masked) actions under the
  // current policy, one column per state.
  Eigen::VectorXd log_probs(const Eigen::MatrixXd& states,
                            const Eigen::MatrixXd& actions) const;
  // Runs the clipped-surrogate epochs over the filled rollout and clears it.
  LossReport update_from_rollout();

  RolloutBuffer& rollout() { return rollout_; }
  GaussianHead& policy() { return policy_; }
  Mlp& value_net() { return value_; }
  const AlgoHyperparams& hyperparams() const { return hp_; }
  long skipped_samples() const { return skipped_samples_; }

 private:
  AlgoHyperparams hp_;
  int dim_;
  ActionBounds bounds_;
  Eigen::VectorXd mask_;
  GaussianHead policy_;
  Mlp value_;
  Adam policy_opt_, value_opt_;
  RolloutBuffer rollout_;
  Rng expl_rng_, shuffle_rng_;
  // Log-prob and value of the action handed out by the last train-mode
  // select_action; consumed by the matching record call.
  double pending_log_prob_ = 0.0;
  double pending_value_ = 0.0;
  bool pending_ = false;
  long skipped_samples_ = 0;
};

}  // namespace clc
