#include "clc/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
constexpr double kLog2 = 0.6931471805599453;

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// ln(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
  return 2.0 * (kLog2 - u - softplus(-2.0 * u));
}

}  // namespace

GaussianHead::GaussianHead(Mlp net, GaussianHeadConfig cfg)
    : net_(std::move(net)), cfg_(std::move(cfg)) {
  if (net_.output_dim() % 2 != 0) {
    throw std::invalid_argument("gaussian trunk must output (mean, log_std) pairs");
  }
  dim_ = net_.output_dim() / 2;
  if (!(cfg_.log_std_min < cfg_.log_std_max)) {
    throw std::invalid_argument("log-std clamp range is empty");
  }
  if (cfg_.squash) {
    if (cfg_.low.size() != dim_ || cfg_.high.size() != dim_) {
      throw std::invalid_argument("squash bounds must match the action dimension");
    }
    if (((cfg_.high - cfg_.low).array() <= 0.0).any()) {
      throw std::invalid_argument("squash bounds must have positive extent");
    }
    center_ = 0.5 * (cfg_.low + cfg_.high);
    half_ = 0.5 * (cfg_.high - cfg_.low);
  }
}

GaussianParams GaussianHead::split(const Eigen::MatrixXd& trunk_out) const {
  if (trunk_out.rows() != 2 * dim_) {
    throw std::invalid_argument("trunk output does not split into (mean, log_std)");
  }
  GaussianParams p;
  p.mean = trunk_out.topRows(dim_);
  const Eigen::MatrixXd raw = trunk_out.bottomRows(dim_);
  p.log_std = raw.cwiseMax(cfg_.log_std_min).cwiseMin(cfg_.log_std_max);
  p.clamp_pass = ((raw.array() > cfg_.log_std_min) && (raw.array() < cfg_.log_std_max))
                     .cast<double>()
                     .matrix();
  return p;
}

Eigen::MatrixXd GaussianHead::diag_log_prob_terms(const Eigen::MatrixXd& mean,
                                                  const Eigen::MatrixXd& log_std,
                                                  const Eigen::MatrixXd& x) {
  const Eigen::ArrayXXd z = (x - mean).array() * (-log_std).array().exp();
  return (-kHalfLog2Pi - log_std.array() - 0.5 * z.square()).matrix();
}

Eigen::MatrixXd GaussianHead::squash_correction_terms(const Eigen::MatrixXd& u) const {
  if (!cfg_.squash) return Eigen::MatrixXd::Zero(u.rows(), u.cols());
  Eigen::MatrixXd out(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      out(i, j) = std::log(half_(i)) + log_one_minus_tanh_sq(u(i, j));
    }
  }
  return out;
}

Eigen::MatrixXd GaussianHead::squash(const Eigen::MatrixXd& u) const {
  if (!cfg_.squash) return u;
  Eigen::MatrixXd a = u.array().tanh().matrix();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    a.col(j) = center_ + half_.cwiseProduct(a.col(j));
  }
  return a;
}

Eigen::MatrixXd GaussianHead::unsquash(const Eigen::MatrixXd& a) const {
  if (!cfg_.squash) return a;
  Eigen::MatrixXd u(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double t = (a(i, j) - center_(i)) / half_(i);
      t = std::min(1.0 - 1e-12, std::max(-1.0 + 1e-12, t));
      u(i, j) = std::atanh(t);
    }
  }
  return u;
}

GaussianHead::Sample GaussianHead::sample(const Eigen::VectorXd& features,
                                          Rng& rng) const {
  if (!features.allFinite()) {
    throw std::invalid_argument("non-finite policy features");
  }
  const GaussianParams p = split(net_.eval(features));
  Sample s;
  s.noise.resize(dim_);
  for (int i = 0; i < dim_; ++i) s.noise(i) = rng.normal();
  s.pre_squash = p.mean + p.log_std.array().exp().matrix().cwiseProduct(s.noise);
  s.action = squash(s.pre_squash);
  s.log_prob_terms =
      diag_log_prob_terms(p.mean, p.log_std, s.pre_squash) -
      squash_correction_terms(s.pre_squash);
  s.log_prob = s.log_prob_terms.sum();
  return s;
}

GaussianHead::Sample GaussianHead::sample(const Eigen::VectorXd& features,
                                          std::uint64_t noise_seed) const {
  Rng rng(noise_seed);
  return sample(features, rng);
}

Eigen::VectorXd GaussianHead::mean_action(const Eigen::VectorXd& features) const {
  const GaussianParams p = split(net_.eval(features));
  return squash(p.mean);
}

}  // namespace clc
