#include "clc/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace clc {

Adam::Adam(Eigen::Index dim, AdamConfig cfg) : cfg_(cfg) {
  if (dim <= 0) throw std::invalid_argument("optimizer dimension must be positive");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  m_ = Eigen::VectorXd::Zero(dim);
  v_ = Eigen::VectorXd::Zero(dim);
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("optimizer/parameter dimension mismatch");
  }
  if (!grads.allFinite()) {
    throw std::runtime_error("non-finite gradient at optimizer step " +
                             std::to_string(t_ + 1));
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grads;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -=
      cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
}

void Adam::restore(const Eigen::VectorXd& m, const Eigen::VectorXd& v, std::int64_t t) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw std::invalid_argument("optimizer state dimension mismatch");
  }
  if (t < 0) throw std::invalid_argument("optimizer step counter must be nonnegative");
  m_ = m;
  v_ = v;
  t_ = t;
}

void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau) {
  if (target.size() != online.size()) {
    throw std::invalid_argument("polyak target/online dimension mismatch");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("polyak tau must lie in (0, 1]");
  }
  target = (1.0 - tau) * target + tau * online;
}

}  // namespace clc
