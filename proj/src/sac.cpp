#include "clc/sac.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

namespace {

constexpr std::uint64_t kTrunkStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kExploreStream = 3;
constexpr std::uint64_t kSampleStream = 4;
constexpr std::uint64_t kCritic2Stream = 5;
constexpr std::uint64_t kNextNoiseStream = 7;
constexpr std::uint64_t kActorNoiseStream = 8;

// One standard-normal draw per matrix element, column by column.
Eigen::MatrixXd draw_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd n(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) n(i, j) = rng.normal();
  }
  return n;
}

}  // namespace

SacTrainer::SacTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds,
                       std::uint64_t seed)
    : hp_(hp),
      dim_(static_cast<int>(bounds.low.size())),
      bounds_(bounds),
      replay_(hp.replay_capacity, hp.warmup),
      expl_rng_(derive_seed(seed, kExploreStream)),
      sample_rng_(derive_seed(seed, kSampleStream)),
      next_noise_rng_(derive_seed(seed, kNextNoiseStream)),
      actor_noise_rng_(derive_seed(seed, kActorNoiseStream)) {
  hp_.validate();
  if (dim_ <= 0 || bounds.high.size() != dim_) {
    throw std::invalid_argument("action bounds must be nonempty and consistent");
  }
  mask_ = Eigen::VectorXd::Ones(dim_);
  target_entropy_ = -hp_.target_entropy_scale * dim_;

  Mlp trunk = make_gaussian_trunk(hp_, dim_);
  Rng trunk_rng(derive_seed(seed, kTrunkStream));
  trunk.init(trunk_rng, hp_.actor_final_scale);
  GaussianHeadConfig head_cfg;
  head_cfg.log_std_min = hp_.log_std_min;
  head_cfg.log_std_max = hp_.log_std_max;
  head_cfg.squash = true;
  head_cfg.low = bounds.low;
  head_cfg.high = bounds.high;
  policy_ = GaussianHead(std::move(trunk), head_cfg);

  critic1_ = make_critic_net(hp_, dim_);
  critic2_ = make_critic_net(hp_, dim_);
  Rng c1_rng(derive_seed(seed, kCriticStream));
  Rng c2_rng(derive_seed(seed, kCritic2Stream));
  critic1_.init(c1_rng);
  critic2_.init(c2_rng);
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;

  policy_opt_ = Adam(policy_.net().param_count(), {hp_.lr});
  critic1_opt_ = Adam(critic1_.param_count(), {hp_.lr});
  critic2_opt_ = Adam(critic2_.param_count(), {hp_.lr});
  log_alpha_ = Eigen::VectorXd::Constant(1, std::log(std::max(hp_.init_alpha, 1e-12)));
  alpha_opt_ = Adam(1, {hp_.lr});
}

void SacTrainer::set_action_mask(const Eigen::VectorXd& mask) {
  if (mask.size() != dim_) throw std::invalid_argument("action mask dimension mismatch");
  mask_ = mask;
  target_entropy_ = -hp_.target_entropy_scale * mask.sum();
}

Eigen::VectorXd SacTrainer::select_action(const StateVector& state, bool train_mode) {
  if (train_mode) {
    const GaussianHead::Sample s = policy_.sample(state, expl_rng_);
    return s.action.cwiseProduct(mask_);
  }
  return policy_.mean_action(state).cwiseProduct(mask_);
}

void SacTrainer::record(const StateVector& state, const Eigen::VectorXd& action,
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

SacTrainer::NextSample SacTrainer::sample_next(const Eigen::MatrixXd& next_states,
                                               std::uint64_t seed) const {
  Rng rng(seed);
  const GaussianParams p = policy_.split(policy_.net().eval(next_states));
  const Eigen::MatrixXd eps = draw_noise(dim_, next_states.cols(), rng);
  const Eigen::MatrixXd u =
      p.mean + p.log_std.array().exp().matrix().cwiseProduct(eps);
  NextSample out;
  out.actions = mask_.asDiagonal() * policy_.squash(u);
  const Eigen::MatrixXd terms =
      GaussianHead::diag_log_prob_terms(p.mean, p.log_std, u) -
      policy_.squash_correction_terms(u);
  out.log_probs = terms.transpose() * mask_;
  return out;
}

Eigen::VectorXd SacTrainer::td_targets(const ReplayBuffer::Batch& batch,
                                       const NextSample& next) const {
  const Eigen::MatrixXd x = stack_state_action(batch.next_states, next.actions);
  const Eigen::MatrixXd q1 = critic1_target_.eval(x);
  const Eigen::MatrixXd q2 = critic2_target_.eval(x);
  const double a = alpha();
  Eigen::VectorXd y(batch.count());
  for (Eigen::Index j = 0; j < batch.count(); ++j) {
    const double soft_v = std::min(q1(0, j), q2(0, j)) - a * next.log_probs(j);
    y(j) = batch.rewards(j) + hp_.gamma * (1.0 - batch.done(j)) * soft_v;
  }
  return y;
}

LossReport SacTrainer::update_once() {
  const auto batch = replay_.sample(static_cast<std::size_t>(hp_.batch_size), sample_rng_);
  const Eigen::Index n = batch.count();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossReport report;

  // Critic regression toward the entropy-regularized target.
  const NextSample next = sample_next(batch.next_states, next_noise_rng_.uniform_int(UINT64_MAX));
  const Eigen::VectorXd y = td_targets(batch, next);
  const Eigen::MatrixXd x = stack_state_action(batch.states, batch.actions);
  for (Mlp* critic : {&critic1_, &critic2_}) {
    critic->zero_grad();
    const Eigen::MatrixXd q = critic->forward(x);
    const Eigen::MatrixXd err = q - y.transpose();
    report.critic_loss += err.squaredNorm() * inv_n;
    critic->backward(2.0 * inv_n * err);
  }
  report.critic_loss /= 2.0;
  Eigen::VectorXd p1 = critic1_.params();
  critic1_opt_.step(p1, critic1_.grads());
  critic1_.set_params(p1);
  Eigen::VectorXd p2 = critic2_.params();
  critic2_opt_.step(p2, critic2_.grads());
  critic2_.set_params(p2);
  report.critic_updates = 1;

  // Actor: minimize alpha * log pi - min(Q1, Q2) on a fresh reparameterized
  // draw. The chain runs action <- tanh(u) <- u = mean + std * eps.
  const double a_temp = alpha();
  Mlp& trunk = policy_.net();
  trunk.zero_grad();
  const GaussianParams gp = policy_.split(trunk.forward(batch.states));
  const Eigen::MatrixXd eps = draw_noise(dim_, n, actor_noise_rng_);
  const Eigen::MatrixXd stds = gp.log_std.array().exp().matrix();
  const Eigen::MatrixXd u = gp.mean + stds.cwiseProduct(eps);
  const Eigen::MatrixXd tanh_u = u.array().tanh().matrix();
  const Eigen::MatrixXd actions = mask_.asDiagonal() * policy_.squash(u);

  const Eigen::MatrixXd terms =
      GaussianHead::diag_log_prob_terms(gp.mean, gp.log_std, u) -
      policy_.squash_correction_terms(u);
  const Eigen::VectorXd log_probs = terms.transpose() * mask_;

  const Eigen::MatrixXd xa = stack_state_action(batch.states, actions);
  critic1_.zero_grad();
  critic2_.zero_grad();
  const Eigen::MatrixXd q1 = critic1_.forward(xa);
  const Eigen::MatrixXd q2 = critic2_.forward(xa);
  Eigen::MatrixXd up1 = Eigen::MatrixXd::Zero(1, n);
  Eigen::MatrixXd up2 = Eigen::MatrixXd::Zero(1, n);
  double q_min_mean = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (q1(0, j) <= q2(0, j)) {
      up1(0, j) = -inv_n;
      q_min_mean += q1(0, j) * inv_n;
    } else {
      up2(0, j) = -inv_n;
      q_min_mean += q2(0, j) * inv_n;
    }
  }
  const Eigen::MatrixXd din =
      critic1_.backward(up1).bottomRows(dim_) + critic2_.backward(up2).bottomRows(dim_);

  // d(action)/du for active rows; masked rows contribute nothing.
  Eigen::MatrixXd dl_du = din.cwiseProduct(
      (1.0 - tanh_u.array().square()).matrix());
  for (int i = 0; i < dim_; ++i) {
    dl_du.row(i) *= 0.5 * (bounds_.high(i) - bounds_.low(i)) * mask_(i);
  }
  // alpha * log pi path: d(log pi)/du = 2 tanh(u) on active rows.
  const Eigen::MatrixXd dlogpi_du =
      (2.0 * tanh_u.array()).matrix();
  Eigen::MatrixXd d_mean = dl_du;
  Eigen::MatrixXd d_logstd = dl_du.cwiseProduct(stds.cwiseProduct(eps));
  for (int i = 0; i < dim_; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g = a_temp * inv_n * mask_(i) * dlogpi_du(i, j);
      d_mean(i, j) += g;
      d_logstd(i, j) += g * stds(i, j) * eps(i, j) - a_temp * inv_n * mask_(i);
    }
  }
  d_logstd = d_logstd.cwiseProduct(gp.clamp_pass);
  Eigen::MatrixXd upstream(2 * dim_, n);
  upstream.topRows(dim_) = d_mean;
  upstream.bottomRows(dim_) = d_logstd;
  trunk.backward(upstream);
  Eigen::VectorXd tp = trunk.params();
  policy_opt_.step(tp, trunk.grads());
  trunk.set_params(tp);
  report.actor_updates = 1;
  report.actor_loss = a_temp * log_probs.mean() - q_min_mean;
  report.policy_entropy = -log_probs.mean();

  // Temperature dual step toward the entropy target.
  if (hp_.auto_alpha) {
    Eigen::VectorXd grad(1);
    grad(0) = -a_temp * (log_probs.mean() + target_entropy_);
    alpha_opt_.step(log_alpha_, grad);
  }
  report.alpha = alpha();

  polyak_net(critic1_target_, critic1_, hp_.tau);
  polyak_net(critic2_target_, critic2_, hp_.tau);
  return report;
}

std::optional<LossReport> SacTrainer::maybe_update() {
  if (!replay_.warm()) return std::nullopt;
  LossReport total;
  for (int i = 0; i < hp_.updates_per_step; ++i) {
    const LossReport r = update_once();
    total.critic_loss += r.critic_loss;
    total.actor_loss += r.actor_loss;
    total.policy_entropy += r.policy_entropy;
    total.alpha = r.alpha;
    total.critic_updates += r.critic_updates;
    total.actor_updates += r.actor_updates;
  }
  total.critic_loss /= hp_.updates_per_step;
  total.actor_loss /= hp_.updates_per_step;
  total.policy_entropy /= hp_.updates_per_step;
  return total;
}

void SacTrainer::save(Checkpoint& ck) const {
  ck.put_string("algo", "sac");
  ck.put_int("schema", 1);
  ck.put_int("action_dim", dim_);
  ck.put_int("hidden_width", hp_.hidden_width);
  ck.put_int("hidden_depth", hp_.hidden_depth);
  ck.put_vector("bounds_low", bounds_.low);
  ck.put_vector("bounds_high", bounds_.high);
  ck.put_vector("action_mask", mask_);
  ck.put_vector("log_alpha", log_alpha_);
  ck.put_real("target_entropy", target_entropy_);
  save_net(ck, "policy", policy_.net());
  save_net(ck, "critic1", critic1_);
  save_net(ck, "critic2", critic2_);
  save_net(ck, "critic1_target", critic1_target_);
  save_net(ck, "critic2_target", critic2_target_);
  ck.put_vector("policy_opt_m", policy_opt_.first_moment());
  ck.put_vector("policy_opt_v", policy_opt_.second_moment());
  ck.put_int("policy_opt_t", policy_opt_.steps());
  ck.put_vector("critic1_opt_m", critic1_opt_.first_moment());
  ck.put_vector("critic1_opt_v", critic1_opt_.second_moment());
  ck.put_int("critic1_opt_t", critic1_opt_.steps());
  ck.put_vector("critic2_opt_m", critic2_opt_.first_moment());
  ck.put_vector("critic2_opt_v", critic2_opt_.second_moment());
  ck.put_int("critic2_opt_t", critic2_opt_.steps());
  ck.put_vector("alpha_opt_m", alpha_opt_.first_moment());
  ck.put_vector("alpha_opt_v", alpha_opt_.second_moment());
  ck.put_int("alpha_opt_t", alpha_opt_.steps());
}

void SacTrainer::load(const Checkpoint& ck) {
  if (ck.str("algo") != "sac") throw std::runtime_error("checkpoint algo mismatch");
  if (ck.integer("action_dim") != dim_ ||
      ck.integer("hidden_width") != hp_.hidden_width ||
      ck.integer("hidden_depth") != hp_.hidden_depth) {
    throw std::runtime_error("checkpoint architecture mismatch");
  }
  mask_ = ck.vector("action_mask");
  log_alpha_ = ck.vector("log_alpha");
  target_entropy_ = ck.real("target_entropy");
  load_net(ck, "policy", policy_.net());
  load_net(ck, "critic1", critic1_);
  load_net(ck, "critic2", critic2_);
  load_net(ck, "critic1_target", critic1_target_);
  load_net(ck, "critic2_target", critic2_target_);
  policy_opt_.restore(ck.vector("policy_opt_m"), ck.vector("policy_opt_v"),
                      ck.integer("policy_opt_t"));
  critic1_opt_.restore(ck.vector("critic1_opt_m"), ck.vector("critic1_opt_v"),
                       ck.integer("critic1_opt_t"));
  critic2_opt_.restore(ck.vector("critic2_opt_m"), ck.vector("critic2_opt_v"),
                       ck.integer("critic2_opt_t"));
  alpha_opt_.restore(ck.vector("alpha_opt_m"), ck.vector("alpha_opt_v"),
                     ck.integer("alpha_opt_t"));
}

}  // namespace clc
