#include "clc/td3.hpp"

#include <algorithm>
#include <stdexcept>

namespace clc {

namespace {

// Streams 1-4 deliberately coincide with ddpg.cpp so equal master seeds give
// identical actor/first-critic initializations and draw sequences.
constexpr std::uint64_t kActorStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kExploreStream = 3;
constexpr std::uint64_t kSampleStream = 4;
constexpr std::uint64_t kCritic2Stream = 5;
constexpr std::uint64_t kSmoothStream = 6;

}  // namespace

Td3Trainer::Td3Trainer(const AlgoHyperparams& hp, const ActionBounds& bounds,
                       std::uint64_t seed)
    : hp_(hp),
      dim_(static_cast<int>(bounds.low.size())),
      bounds_(bounds),
      replay_(hp.replay_capacity, hp.warmup),
      expl_rng_(derive_seed(seed, kExploreStream)),
      sample_rng_(derive_seed(seed, kSampleStream)),
      smooth_rng_(derive_seed(seed, kSmoothStream)) {
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

  critic1_ = make_critic_net(hp_, dim_);
  critic2_ = make_critic_net(hp_, dim_);
  Rng c1_rng(derive_seed(seed, kCriticStream));
  Rng c2_rng(derive_seed(seed, kCritic2Stream));
  critic1_.init(c1_rng);
  critic2_.init(c2_rng);
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;

  actor_opt_ = Adam(actor_.net.param_count(), {hp_.lr});
  critic1_opt_ = Adam(critic1_.param_count(), {hp_.lr});
  critic2_opt_ = Adam(critic2_.param_count(), {hp_.lr});
}

void Td3Trainer::set_action_mask(const Eigen::VectorXd& mask) {
  if (mask.size() != dim_) throw std::invalid_argument("action mask dimension mismatch");
  mask_ = mask;
}

Eigen::VectorXd Td3Trainer::select_action(const StateVector& state, bool train_mode) {
  Eigen::VectorXd a = actor_.act(state);
  if (train_mode) {
    for (int i = 0; i < dim_; ++i) {
      a(i) += hp_.expl_noise * expl_rng_.normal() * mask_(i);
    }
  }
  a = a.cwiseMax(bounds_.low).cwiseMin(bounds_.high);
  return a.cwiseProduct(mask_);
}

void Td3Trainer::record(const StateVector& state, const Eigen::VectorXd& action,
                        double reward, const StateVector& next_state, bool done,
                        bool truncated) {
  (void)truncated;
  Transition t;
  t.state = state;
  t.action = action;
  t.reward = reward;
  t.next_state = next_state;
  t.done = done;
  replay_.push(t);
}

Eigen::VectorXd Td3Trainer::td_targets(const ReplayBuffer::Batch& batch,
                                       Rng& noise_rng) const {
  Eigen::MatrixXd next_a = actor_target_.act(batch.next_states);
  // Clipped smoothing noise; one draw per element regardless of sigma.
  for (Eigen::Index j = 0; j < next_a.cols(); ++j) {
    for (int i = 0; i < dim_; ++i) {
      const double eps = std::clamp(hp_.smooth_noise * noise_rng.normal(),
                                    -hp_.smooth_clip, hp_.smooth_clip);
      next_a(i, j) = std::clamp(next_a(i, j) + eps * mask_(i), bounds_.low(i),
                                bounds_.high(i));
    }
  }
  next_a = mask_.asDiagonal() * next_a;
  const Eigen::MatrixXd x = stack_state_action(batch.next_states, next_a);
  const Eigen::MatrixXd q1 = critic1_target_.eval(x);
  const Eigen::MatrixXd q2 = critic2_target_.eval(x);
  Eigen::VectorXd y(batch.count());
  for (Eigen::Index j = 0; j < batch.count(); ++j) {
    y(j) = batch.rewards(j) +
           hp_.gamma * (1.0 - batch.done(j)) * std::min(q1(0, j), q2(0, j));
  }
  return y;
}

LossReport Td3Trainer::update_once() {
  const auto batch = replay_.sample(static_cast<std::size_t>(hp_.batch_size), sample_rng_);
  const Eigen::Index n = batch.count();
  const Eigen::VectorXd y = td_targets(batch, smooth_rng_);

  LossReport report;
  const Eigen::MatrixXd x = stack_state_action(batch.states, batch.actions);
  for (Mlp* critic : {&critic1_, &critic2_}) {
    critic->zero_grad();
    const Eigen::MatrixXd q = critic->forward(x);
    const Eigen::MatrixXd err = q - y.transpose();
    report.critic_loss += err.squaredNorm() / static_cast<double>(n);
    critic->backward(2.0 / static_cast<double>(n) * err);
  }
  report.critic_loss /= 2.0;
  Eigen::VectorXd p1 = critic1_.params();
  critic1_opt_.step(p1, critic1_.grads());
  critic1_.set_params(p1);
  Eigen::VectorXd p2 = critic2_.params();
  critic2_opt_.step(p2, critic2_.grads());
  critic2_.set_params(p2);
  ++critic_updates_;
  report.critic_updates = 1;

  if (critic_updates_ % hp_.policy_delay == 0) {
    const Eigen::MatrixXd a_pi = mask_.asDiagonal() * actor_.act_traced(batch.states);
    critic1_.zero_grad();
    const Eigen::MatrixXd q_pi =
        critic1_.forward(stack_state_action(batch.states, a_pi));
    report.actor_loss = -q_pi.mean();
    const Eigen::MatrixXd d_input = critic1_.backward(
        Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n)));
    const Eigen::MatrixXd dl_da = mask_.asDiagonal() * d_input.bottomRows(dim_);
    actor_.net.zero_grad();
    actor_.net.backward(actor_.upstream_into_net(dl_da));
    Eigen::VectorXd ap = actor_.net.params();
    actor_opt_.step(ap, actor_.net.grads());
    actor_.net.set_params(ap);
    ++actor_updates_;
    report.actor_updates = 1;

    polyak_net(actor_target_.net, actor_.net, hp_.tau);
    polyak_net(critic1_target_, critic1_, hp_.tau);
    polyak_net(critic2_target_, critic2_, hp_.tau);
  }
  return report;
}

std::optional<LossReport> Td3Trainer::maybe_update() {
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
  if (total.actor_updates > 0) total.actor_loss /= total.actor_updates;
  return total;
}

void Td3Trainer::save(Checkpoint& ck) const {
  ck.put_string("algo", "td3");
  ck.put_int("schema", 1);
  ck.put_int("action_dim", dim_);
  ck.put_int("hidden_width", hp_.hidden_width);
  ck.put_int("hidden_depth", hp_.hidden_depth);
  ck.put_vector("bounds_low", bounds_.low);
  ck.put_vector("bounds_high", bounds_.high);
  ck.put_vector("action_mask", mask_);
  ck.put_int("critic_updates", critic_updates_);
  ck.put_int("actor_updates", actor_updates_);
  save_net(ck, "actor", actor_.net);
  save_net(ck, "actor_target", actor_target_.net);
  save_net(ck, "critic1", critic1_);
  save_net(ck, "critic2", critic2_);
  save_net(ck, "critic1_target", critic1_target_);
  save_net(ck, "critic2_target", critic2_target_);
  ck.put_vector("actor_opt_m", actor_opt_.first_moment());
  ck.put_vector("actor_opt_v", actor_opt_.second_moment());
  ck.put_int("actor_opt_t", actor_opt_.steps());
  ck.put_vector("critic1_opt_m", critic1_opt_.first_moment());
  ck.put_vector("critic1_opt_v", critic1_opt_.second_moment());
  ck.put_int("critic1_opt_t", critic1_opt_.steps());
  ck.put_vector("critic2_opt_m", critic2_opt_.first_moment());
  ck.put_vector("critic2_opt_v", critic2_opt_.second_moment());
  ck.put_int("critic2_opt_t", critic2_opt_.steps());
}

void Td3Trainer::load(const Checkpoint& ck) {
  if (ck.str("algo") != "td3") throw std::runtime_error("checkpoint algo mismatch");
  if (ck.integer("action_dim") != dim_ ||
      ck.integer("hidden_width") != hp_.hidden_width ||
      ck.integer("hidden_depth") != hp_.hidden_depth) {
    throw std::runtime_error("checkpoint architecture mismatch");
  }
  mask_ = ck.vector("action_mask");
  critic_updates_ = ck.integer("critic_updates");
  actor_updates_ = ck.integer("actor_updates");
  load_net(ck, "actor", actor_.net);
  load_net(ck, "actor_target", actor_target_.net);
  load_net(ck, "critic1", critic1_);
  load_net(ck, "critic2", critic2_);
  load_net(ck, "critic1_target", critic1_target_);
  load_net(ck, "critic2_target", critic2_target_);
  actor_opt_.restore(ck.vector("actor_opt_m"), ck.vector("actor_opt_v"),
                     ck.integer("actor_opt_t"));
  critic1_opt_.restore(ck.vector("critic1_opt_m"), ck.vector("critic1_opt_v"),
                       ck.integer("critic1_opt_t"));
  critic2_opt_.restore(ck.vector("critic2_opt_m"), ck.vector("critic2_opt_v"),
                       ck.integer("critic2_opt_t"));
}

}  // namespace clc
