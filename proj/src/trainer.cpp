#include "clc/trainer.hpp"

#include <stdexcept>

#include "clc/ddpg.hpp"
#include "clc/ppo.hpp"
#include "clc/sac.hpp"
#include "clc/td3.hpp"

namespace clc {

void AlgoHyperparams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (replay_capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (warmup < 1 || warmup > replay_capacity) {
    throw std::invalid_argument("warmup must be in [1, replay capacity]");
  }
  if (updates_per_step < 1) throw std::invalid_argument("updates_per_step must be at least 1");
  if (expl_noise < 0.0 || smooth_noise < 0.0) {
    throw std::invalid_argument("noise scales must be non-negative");
  }
  if (smooth_clip < 0.0) throw std::invalid_argument("smoothing clip must be non-negative");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0, 1]");
  if (policy_delay < 1) throw std::invalid_argument("policy delay must be at least 1");
  if (!(init_alpha > 0.0)) throw std::invalid_argument("initial temperature must be positive");
  if (target_entropy_scale < 0.0) {
    throw std::invalid_argument("target entropy scale must be non-negative");
  }
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) {
    throw std::invalid_argument("clip ratio must be in (0, 1)");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae lambda must be in [0, 1]");
  }
  if (ppo_epochs < 1) throw std::invalid_argument("ppo epochs must be at least 1");
  if (rollout_horizon < 1) throw std::invalid_argument("rollout horizon must be at least 1");
  if (minibatch < 1) throw std::invalid_argument("minibatch must be at least 1");
  if (hidden_width < 1 || hidden_depth < 1) {
    throw std::invalid_argument("hidden layers must be non-degenerate");
  }
  if (!(log_std_min < log_std_max)) {
    throw std::invalid_argument("log-std clamp range must be non-empty");
  }
  if (!(actor_final_scale > 0.0)) {
    throw std::invalid_argument("actor final-layer scale must be positive");
  }
}

Eigen::MatrixXd BoundedActor::act(const Eigen::MatrixXd& states) const {
  Eigen::MatrixXd a = half.asDiagonal() * net.eval(states);
  a.colwise() += center;
  return a;
}

Eigen::MatrixXd BoundedActor::act_traced(const Eigen::MatrixXd& states) {
  Eigen::MatrixXd a = half.asDiagonal() * net.forward(states);
  a.colwise() += center;
  return a;
}

Eigen::MatrixXd BoundedActor::upstream_into_net(const Eigen::MatrixXd& dl_da) const {
  return half.asDiagonal() * dl_da;
}

Eigen::MatrixXd stack_state_action(const Eigen::MatrixXd& states,
                                   const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) {
    throw std::invalid_argument("state/action batch size mismatch");
  }
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Mlp make_gaussian_trunk(const AlgoHyperparams& hp, int action_dim) {
  std::vector<LayerSpec> layers(static_cast<std::size_t>(hp.hidden_depth),
                                {hp.hidden_width, Activation::ReLU});
  layers.push_back({2 * action_dim, Activation::Identity});
  return Mlp(16, std::move(layers));
}

Mlp make_value_net(const AlgoHyperparams& hp) {
  std::vector<LayerSpec> layers(static_cast<std::size_t>(hp.hidden_depth),
                                {hp.hidden_width, Activation::ReLU});
  layers.push_back({1, Activation::Identity});
  return Mlp(16, std::move(layers));
}

void save_net(Checkpoint& ck, const std::string& prefix, const Mlp& net) {
  ck.put_vector(prefix + "_params", net.params());
}

void load_net(const Checkpoint& ck, const std::string& prefix, Mlp& net) {
  const Eigen::VectorXd& p = ck.vector(prefix + "_params");
  if (p.size() != net.param_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch for " + prefix);
  }
  net.set_params(p);
}

std::unique_ptr<Trainer> make_trainer(const std::string& algo, const AlgoHyperparams& hp,
                                      const ActionBounds& bounds, std::uint64_t seed) {
  if (algo == "ddpg") return std::make_unique<DdpgTrainer>(hp, bounds, seed);
  if (algo == "td3") return std::make_unique<Td3Trainer>(hp, bounds, seed);
  if (algo == "sac") return std::make_unique<SacTrainer>(hp, bounds, seed);
  if (algo == "ppo") return std::make_unique<PpoTrainer>(hp, bounds, seed);
  throw std::invalid_argument("unknown algorithm: " + algo);
}

}  // namespace clc
