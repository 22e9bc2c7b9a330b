#include "clc/ddpg.hpp"

#include <stdexcept>

namespace clc {

namespace {

// Seed stream ids shared with td3.cpp so that equal master seeds give the
// TD3 reduction test identical actor/first-critic initializations.
constexpr std::uint64_t kActorStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kExploreStream = 3;
constexpr std::uint64_t kSampleStream = 4;

}  // namespace

Mlp make_actor_net(const AlgoHyperparams& hp, int action_dim) {
  std::vector<LayerSpec> layers(static_cast<std::size_t>(hp.hidden_depth),
                                {hp.hidden_width, Activation::ReLU});
  layers.push_back({action_dim, Activation::Tanh});
  return Mlp(16, std::move(layers));
}

Mlp make_critic_net(const AlgoHyperparams& hp, int action_dim) {
  std::vector<LayerSpec> layers(static_cast<std::size_t>(hp.hidden_depth),
                                {hp.hidden_width, Activation::ReLU});
  layers.push_back({1, Activation::Identity});
  return Mlp(16 + action_dim, std::move(layers));
}

void polyak_net(Mlp& target, const Mlp& online, double tau) {
  Eigen::VectorXd t = target.params();
  polyak_update(t, online.params(), tau);
  target.set_params(t);
}

DdpgTrainer::DdpgTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds,
                         std::uint64_t seed)
    : hp_(hp),
      dim_(static_cast<int>(bounds.low.size())),
      bounds_(bounds),
      replay_(hp.replay_capacity, hp.warmup),
      expl_rng_(derive_seed(seed, kExploreStream)),
      sample_rng_(derive_seed(seed, kSampleStream)) {
  hp_.validate();
  if (dim_ <= 0 || bounds.high.size() != dim_) {
    throw std::invalid_argument("action bounds must be nonempty and consistent");
  }
  mask_ = Eigen::VectorXd::Ones(dim_);

  actor_.net = make_actor_net(hp_, dim_);
  actor_.center = 0.5 * (bounds.low + bounds.high);
  actor_.half = 0.5 * (bounds.high - bounds.low);
  Rng actor_rng(derive_seed(seed, kActorStream));
  actor_.net.init(actor_rng, hp_.actor_final_scale);
  actor_target_ = actor_;

  critic_ = make_critic_net(hp_, dim_);
  Rng critic_rng(derive_seed(seed, kCriticStream));
  critic_.init(critic_rng);
  critic_target_ = critic_;

  actor_opt_ = Adam(actor_.net.param_count(), {hp_.lr});
  critic_opt_ = Adam(critic_.param_count(), {hp_.lr});
}

void DdpgTrainer::set_action_mask(const Eigen::VectorXd& mask) {
  if (mask.size() != dim_) throw std::invalid_argument("action mask dimension mismatch");
  mask_ = mask;
}

Eigen::VectorXd DdpgTrainer::select_action(const StateVector& state, bool train_mode) {
  Eigen::VectorXd a = actor_.act(state);
  if (train_mode) {
    // The noise draw count never depends on the mask.
    for (int i = 0; i < dim_; ++i) {
      a(i) += hp_.expl_noise * expl_rng_.normal() * mask_(i);
    }
  }
  a = a.cwiseMax(bounds_.low).cwiseMin(bounds_.high);
  return a.cwiseProduct(mask_);
}

void DdpgTrainer::record(const StateVector& state, const Eigen::VectorXd& action,
                         double reward, const StateVector& next_state, bool done,
                         bool truncated) {
  (void)truncated;  // a cut episode still bootstraps; done alone masks targets
  Transition t;
  t.state = state;
  t.action = action;
  t.reward = reward;
  t.next_state = next_state;
  t.done = done;
  replay_.push(t);
}

Eigen::VectorXd DdpgTrainer::td_targets(const ReplayBuffer::Batch& batch) const {
  Eigen::MatrixXd next_a =
      mask_.asDiagonal() * actor_target_.act(batch.next_states);
  const Eigen::MatrixXd q =
      critic_target_.eval(stack_state_action(batch.next_states, next_a));
  Eigen::VectorXd y(batch.count());
  for (Eigen::Index j = 0; j < batch.count(); ++j) {
    y(j) = batch.rewards(j) + hp_.gamma * (1.0 - batch.done(j)) * q(0, j);
  }
  return y;
}

LossReport DdpgTrainer::update_once() {
  const auto batch = replay_.sample(static_cast<std::size_t>(hp_.batch_size), sample_rng_);
  const Eigen::Index n = batch.count();
  const Eigen::VectorXd y = td_targets(batch);

  LossReport report;

  critic_.zero_grad();
  const Eigen::MatrixXd q =
      critic_.forward(stack_state_action(batch.states, batch.actions));
  const Eigen::MatrixXd err = q - y.transpose();
  report.critic_loss = err.squaredNorm() / static_cast<double>(n);
  critic_.backward(2.0 / static_cast<double>(n) * err);
  Eigen::VectorXd cp = critic_.params();
  critic_opt_.step(cp, critic_.grads());
  critic_.set_params(cp);
  report.critic_updates = 1;

  // Actor ascends Q(s, mu(s)) through the freshly updated critic.
  const Eigen::MatrixXd a_pi = mask_.asDiagonal() * actor_.act_traced(batch.states);
  critic_.zero_grad();
  const Eigen::MatrixXd q_pi = critic_.forward(stack_state_action(batch.states, a_pi));
  report.actor_loss = -q_pi.mean();
  const Eigen::MatrixXd d_input = critic_.backward(
      Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n)));
  const Eigen::MatrixXd dl_da = mask_.asDiagonal() * d_input.bottomRows(dim_);
  actor_.net.zero_grad();
  actor_.net.backward(actor_.upstream_into_net(dl_da));
  Eigen::VectorXd ap = actor_.net.params();
  actor_opt_.step(ap, actor_.net.grads());
  actor_.net.set_params(ap);
  report.actor_updates = 1;

  polyak_net(actor_target_.net, actor_.net, hp_.tau);
  polyak_net(critic_target_, critic_, hp_.tau);
  return report;
}

std::optional<LossReport> DdpgTrainer::maybe_update() {
  if (!replay_.warm()) return std::nullopt;
  LossReport total;
  for (int i = 0; i < hp_.updates_per_step; ++i) {
    const LossReport r = update_once();
    total.critic_loss += r.critic_loss;
    total.actor_loss += r.actor_loss;
    total.critic_updates += r.critic_updates;
    total.actor_updates += r.actor_updates;
  }
  total.critic_loss /= hp_.updates_per_step;
  total.actor_loss /= hp_.updates_per_step;
  return total;
}

void DdpgTrainer::save(Checkpoint& ck) const {
  ck.put_string("algo", "ddpg");
  ck.put_int("schema", 1);
  ck.put_int("action_dim", dim_);
  ck.put_int("hidden_width", hp_.hidden_width);
  ck.put_int("hidden_depth", hp_.hidden_depth);
  ck.put_vector("bounds_low", bounds_.low);
  ck.put_vector("bounds_high", bounds_.high);
  ck.put_vector("action_mask", mask_);
  save_net(ck, "actor", actor_.net);
  save_net(ck, "actor_target", actor_target_.net);
  save_net(ck, "critic", critic_);
  save_net(ck, "critic_target", critic_target_);
  ck.put_vector("actor_opt_m", actor_opt_.first_moment());
  ck.put_vector("actor_opt_v", actor_opt_.second_moment());
  ck.put_int("actor_opt_t", actor_opt_.steps());
  ck.put_vector("critic_opt_m", critic_opt_.first_moment());
  ck.put_vector("critic_opt_v", critic_opt_.second_moment());
  ck.put_int("critic_opt_t", critic_opt_.steps());
}

void DdpgTrainer::load(const Checkpoint& ck) {
  if (ck.str("algo") != "ddpg") throw std::runtime_error("checkpoint algo mismatch");
  if (ck.integer("action_dim") != dim_ ||
      ck.integer("hidden_width") != hp_.hidden_width ||
      ck.integer("hidden_depth") != hp_.hidden_depth) {
    throw std::runtime_error("checkpoint architecture mismatch");
  }
  mask_ = ck.vector("action_mask");
  load_net(ck, "actor", actor_.net);
  load_net(ck, "actor_target", actor_target_.net);
  load_net(ck, "critic", critic_);
  load_net(ck, "critic_target", critic_target_);
  actor_opt_.restore(ck.vector("actor_opt_m"), ck.vector("actor_opt_v"),
                     ck.integer("actor_opt_t"));
  critic_opt_.restore(ck.vector("critic_opt_m"), ck.vector("critic_opt_v"),
                      ck.integer("critic_opt_t"));
}

}  // namespace clc
