#include "clc/ppo.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace clc {

namespace {

constexpr std::uint64_t kActorStream = 1;
constexpr std::uint64_t kCriticStream = 2;
constexpr std::uint64_t kExploreStream = 3;
constexpr std::uint64_t kSampleStream = 4;

}  // namespace

PpoTrainer::PpoTrainer(const AlgoHyperparams& hp, const ActionBounds& bounds,
                       std::uint64_t seed)
    : hp_(hp),
      dim_(static_cast<int>(bounds.low.size())),
      bounds_(bounds),
      expl_rng_(derive_seed(seed, kExploreStream)),
      shuffle_rng_(derive_seed(seed, kSampleStream)) {
  hp_.validate();
  if (dim_ <= 0 || bounds.high.size() != dim_) {
    throw std::invalid_argument("action bounds must be nonempty and consistent");
  }
  mask_ = Eigen::VectorXd::Ones(dim_);

  Mlp trunk = make_gaussian_trunk(hp_, dim_);
  Rng trunk_rng(derive_seed(seed, kActorStream));
  trunk.init(trunk_rng, hp_.actor_final_scale);
  GaussianHeadConfig head_cfg;
  head_cfg.log_std_min = hp_.log_std_min;
  head_cfg.log_std_max = hp_.log_std_max;
  head_cfg.squash = false;
  policy_ = GaussianHead(std::move(trunk), head_cfg);

  value_ = make_value_net(hp_);
  Rng value_rng(derive_seed(seed, kCriticStream));
  value_.init(value_rng);

  policy_opt_ = Adam(policy_.net().param_count(), {hp_.lr});
  value_opt_ = Adam(value_.param_count(), {hp_.lr});
}

void PpoTrainer::set_action_mask(const Eigen::VectorXd& mask) {
  if (mask.size() != dim_) throw std::invalid_argument("action mask dimension mismatch");
  mask_ = mask;
}

Eigen::VectorXd PpoTrainer::select_action(const StateVector& state, bool train_mode) {
  if (!train_mode) return policy_.mean_action(state).cwiseProduct(mask_);
  const GaussianHead::Sample s = policy_.sample(state, expl_rng_);
  pending_log_prob_ = s.log_prob_terms.dot(mask_);
  pending_value_ = value_.eval(state)(0, 0);
  pending_ = true;
  return s.action.cwiseProduct(mask_);
}

void PpoTrainer::record(const StateVector& state, const Eigen::VectorXd& action,
                        double reward, const StateVector& next_state, bool done,
                        bool truncated) {
  if (!pending_) {
    throw std::logic_error("record without a preceding train-mode select_action");
  }
  pending_ = false;
  const double next_value = value_.eval(next_state)(0, 0);
  rollout_.push(state, action, pending_log_prob_, reward, pending_value_, done,
                truncated, next_value);
}

Eigen::VectorXd PpoTrainer::log_probs(const Eigen::MatrixXd& states,
                                      const Eigen::MatrixXd& actions) const {
  const GaussianParams p = policy_.split(policy_.net().eval(states));
  const Eigen::MatrixXd terms =
      GaussianHead::diag_log_prob_terms(p.mean, p.log_std, actions);
  return terms.transpose() * mask_;
}

std::optional<LossReport> PpoTrainer::maybe_update() {
  if (rollout_.size() < hp_.rollout_horizon) return std::nullopt;
  return update_from_rollout();
}

LossReport PpoTrainer::update_from_rollout() {
  const int n = rollout_.size();
  if (n == 0) throw std::logic_error("cannot update from an empty rollout");
  rollout_.compute_gae(hp_.gamma, hp_.gae_lambda);

  const Eigen::MatrixXd states = rollout_.states_matrix();
  const Eigen::MatrixXd actions = rollout_.actions_matrix();
  Eigen::VectorXd logp_old(n), adv(n), rets(n);
  for (int t = 0; t < n; ++t) {
    logp_old(t) = rollout_.log_probs()[static_cast<std::size_t>(t)];
    adv(t) = rollout_.advantages()[static_cast<std::size_t>(t)];
    rets(t) = rollout_.returns()[static_cast<std::size_t>(t)];
  }

  LossReport report;
  long batches = 0;
  double clip_hits = 0.0, clip_total = 0.0;
  bool first_batch = true;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) order[static_cast<std::size_t>(t)] = t;

  Mlp& trunk = policy_.net();
  for (int epoch = 0; epoch < hp_.ppo_epochs; ++epoch) {
    for (int t = n - 1; t > 0; --t) {
      const int k = static_cast<int>(shuffle_rng_.uniform_int(static_cast<std::uint64_t>(t) + 1));
      std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(k)]);
    }
    for (int start = 0; start < n; start += hp_.minibatch) {
      const int m = std::min(hp_.minibatch, n - start);
      const double inv_m = 1.0 / static_cast<double>(m);
      Eigen::MatrixXd s_mb(16, m), a_mb(dim_, m);
      Eigen::VectorXd lp_mb(m), adv_mb(m), ret_mb(m);
      for (int j = 0; j < m; ++j) {
        const int idx = order[static_cast<std::size_t>(start + j)];
        s_mb.col(j) = states.col(idx);
        a_mb.col(j) = actions.col(idx);
        lp_mb(j) = logp_old(idx);
        adv_mb(j) = adv(idx);
        ret_mb(j) = rets(idx);
      }

      // Clipped surrogate on the active likelihood dimensions.
      trunk.zero_grad();
      const GaussianParams p = policy_.split(trunk.forward(s_mb));
      const Eigen::MatrixXd stds = p.log_std.array().exp().matrix();
      const Eigen::MatrixXd z = (a_mb - p.mean).cwiseQuotient(stds);
      const Eigen::MatrixXd terms =
          GaussianHead::diag_log_prob_terms(p.mean, p.log_std, a_mb);
      const Eigen::VectorXd logp_new = terms.transpose() * mask_;

      double surrogate = 0.0, entropy = 0.0;
      Eigen::VectorXd dl_dlogp = Eigen::VectorXd::Zero(m);
      double max_dev = 0.0;
      for (int j = 0; j < m; ++j) {
        const double ratio = std::exp(logp_new(j) - lp_mb(j));
        if (!std::isfinite(ratio)) {
          ++skipped_samples_;
          std::fprintf(stderr, "ppo: non-finite likelihood ratio skipped (sample %d)\n",
                       order[static_cast<std::size_t>(start + j)]);
          continue;
        }
        max_dev = std::max(max_dev, std::abs(ratio - 1.0));
        const double lo = 1.0 - hp_.clip_ratio, hi = 1.0 + hp_.clip_ratio;
        const double clipped = std::min(std::max(ratio, lo), hi);
        surrogate += std::min(ratio * adv_mb(j), clipped * adv_mb(j)) * inv_m;
        clip_total += 1.0;
        if (ratio < lo || ratio > hi) clip_hits += 1.0;
        // Gradient flows only where the unclipped branch is active.
        const bool active = adv_mb(j) > 0.0 ? ratio < hi : ratio > lo;
        if (active) dl_dlogp(j) = -inv_m * ratio * adv_mb(j);
      }
      if (first_batch) {
        report.ratio_dev = max_dev;
        first_batch = false;
      }

      Eigen::MatrixXd upstream(2 * dim_, m);
      for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < m; ++j) {
          const double g = dl_dlogp(j) * mask_(i);
          upstream(i, j) = g * z(i, j) / stds(i, j);
          upstream(dim_ + i, j) = g * (z(i, j) * z(i, j) - 1.0);
        }
      }
      upstream.bottomRows(dim_) =
          upstream.bottomRows(dim_).cwiseProduct(p.clamp_pass).eval();
      trunk.backward(upstream);
      Eigen::VectorXd tp = trunk.params();
      policy_opt_.step(tp, trunk.grads());
      trunk.set_params(tp);

      // Per-dimension Gaussian entropy 0.5 * ln(2*pi*e) + log_std.
      constexpr double kHalfLog2PiE = 1.4189385332046727;
      for (int j = 0; j < m; ++j) {
        for (int i = 0; i < dim_; ++i) {
          entropy += mask_(i) * (kHalfLog2PiE + p.log_std(i, j));
        }
      }
      report.actor_loss += -surrogate;
      report.policy_entropy += entropy * inv_m;

      // Value head regresses the bootstrapped returns.
      value_.zero_grad();
      const Eigen::MatrixXd v = value_.forward(s_mb);
      const Eigen::MatrixXd err = v - ret_mb.transpose();
      report.value_loss += err.squaredNorm() * inv_m;
      value_.backward(2.0 * inv_m * err);
      Eigen::VectorXd vp = value_.params();
      value_opt_.step(vp, value_.grads());
      value_.set_params(vp);

      ++batches;
    }
  }

  report.actor_loss /= static_cast<double>(batches);
  report.value_loss /= static_cast<double>(batches);
  report.policy_entropy /= static_cast<double>(batches);
  report.clip_fraction = clip_total > 0.0 ? clip_hits / clip_total : 0.0;
  report.actor_updates = batches;
  report.critic_updates = batches;
  rollout_.clear();
  return report;
}

void PpoTrainer::save(Checkpoint& ck) const {
  ck.put_string("algo", "ppo");
  ck.put_int("schema", 1);
  ck.put_int("action_dim", dim_);
  ck.put_int("hidden_width", hp_.hidden_width);
  ck.put_int("hidden_depth", hp_.hidden_depth);
  ck.put_vector("bounds_low", bounds_.low);
  ck.put_vector("bounds_high", bounds_.high);
  ck.put_vector("action_mask", mask_);
  save_net(ck, "policy", policy_.net());
  save_net(ck, "value", value_);
  ck.put_vector("policy_opt_m", policy_opt_.first_moment());
  ck.put_vector("policy_opt_v", policy_opt_.second_moment());
  ck.put_int("policy_opt_t", policy_opt_.steps());
  ck.put_vector("value_opt_m", value_opt_.first_moment());
  ck.put_vector("value_opt_v", value_opt_.second_moment());
  ck.put_int("value_opt_t", value_opt_.steps());
}

void PpoTrainer::load(const Checkpoint& ck) {
  if (ck.str("algo") != "ppo") throw std::runtime_error("checkpoint algo mismatch");
  if (ck.integer("action_dim") != dim_ ||
      ck.integer("hidden_width") != hp_.hidden_width ||
      ck.integer("hidden_depth") != hp_.hidden_depth) {
    throw std::runtime_error("checkpoint architecture mismatch");
  }
  mask_ = ck.vector("action_mask");
  load_net(ck, "policy", policy_.net());
  load_net(ck, "value", value_);
  policy_opt_.restore(ck.vector("policy_opt_m"), ck.vector("policy_opt_v"),
                      ck.integer("policy_opt_t"));
  value_opt_.restore(ck.vector("value_opt_m"), ck.vector("value_opt_v"),
                     ck.integer("value_opt_t"));
}

}  // namespace clc
