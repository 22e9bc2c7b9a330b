#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "clc/checkpoint.hpp"
#include "clc/dynamics.hpp"
#include "clc/mlp.hpp"
#include "clc/world.hpp"

namespace clc {

struct AlgoHyperparams {
  double gamma = 0.995;
  double lr = 6e-5;
  int batch_size = 2000;           // off-policy minibatch
  std::size_t replay_capacity = 50000;
  std::size_t warmup = 10000;      // steps before updates start
  int updates_per_step = 1;
  double expl_noise = 0.5;         // DDPG/TD3 exploration std
  double smooth_noise = 0.5;       // TD3 target smoothing std
  double smooth_clip = 0.5;        // TD3 smoothing noise clip
  double tau = 0.005;              // polyak rate
  int policy_delay = 2;            // TD3
  double init_alpha = 0.2;         // SAC temperature (auto-tuned by default)
  bool auto_alpha = true;
  double target_entropy_scale = 1.0;  // target entropy = -scale * action_dim
  double clip_ratio = 0.2;         // PPO
  double gae_lambda = 0.95;
  int ppo_epochs = 10;
  int rollout_horizon = 2000;      // PPO steps between updates
  int minibatch = 200;             // PPO minibatch
  int hidden_width = 256;
  int hidden_depth = 2;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  double actor_final_scale = 1e-2;

  void validate() const;
};

struct LossReport {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double value_loss = 0.0;     // PPO value head
  double alpha = 0.0;          // SAC temperature after the update
  double policy_entropy = 0.0;
  double clip_fraction = 0.0;  // PPO
  double ratio_dev = 0.0;      // PPO: max |ratio - 1| on the first minibatch
  long critic_updates = 0;
  long actor_updates = 0;
};

// One learning agent. Single-threaded use: select_action for the current
// state, then record the resulting transition, then maybe_update once per
// environment step. `truncated` marks episode cuts that must still bootstrap
// (timeouts); `done` marks true terminals.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual const char* name() const = 0;
  virtual int action_dim() const = 0;
  virtual Eigen::VectorXd select_action(const StateVector& state, bool train_mode) = 0;
  virtual void record(const StateVector& state, const Eigen::VectorXd& action,
                      double reward, const StateVector& next_state, bool done,
                      bool truncated) = 0;
  virtual std::optional<LossReport> maybe_update() = 0;
  // Active slots of the action vector; inactive slots are forced to zero and
  // excluded from likelihoods. All-ones outside mixed-composition training.
  virtual void set_action_mask(const Eigen::VectorXd& mask) = 0;
  virtual void save(Checkpoint& ck) const = 0;
  virtual void load(const Checkpoint& ck) = 0;
};

std::unique_ptr<Trainer> make_trainer(const std::string& algo, const AlgoHyperparams& hp,
                                      const ActionBounds& bounds, std::uint64_t seed);

// Deterministic actor with a tanh output layer mapped affinely into the
// action box; outputs cannot leave the box.
struct BoundedActor {
  Mlp net;  // final activation must be Tanh
  Eigen::VectorXd center, half;

  Eigen::MatrixXd act(const Eigen::MatrixXd& states) const;
  Eigen::MatrixXd act_traced(const Eigen::MatrixXd& states);
  // Chain rule through the affine map; the Tanh lives inside the net.
  Eigen::MatrixXd upstream_into_net(const Eigen::MatrixXd& dl_da) const;
};

// [states; actions] stacking for Q critics.
Eigen::MatrixXd stack_state_action(const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& actions);

// Network shapes shared across the trainers.
Mlp make_actor_net(const AlgoHyperparams& hp, int action_dim);
Mlp make_critic_net(const AlgoHyperparams& hp, int action_dim);
Mlp make_gaussian_trunk(const AlgoHyperparams& hp, int action_dim);
Mlp make_value_net(const AlgoHyperparams& hp);
void polyak_net(Mlp& target, const Mlp& online, double tau);

// Shared checkpoint plumbing: parameters plus Adam state under a name prefix.
void save_net(Checkpoint& ck, const std::string& prefix, const Mlp& net);
void load_net(const Checkpoint& ck, const std::string& prefix, Mlp& net);

}  // namespace clc
