#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace clc {

struct AdamConfig {
  double lr = 6e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam on a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index dim, AdamConfig cfg);

  // In-place update; rejects non-finite gradients.
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads);

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  std::int64_t steps() const { return t_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  // Checkpoint restore.
  void restore(const Eigen::VectorXd& m, const Eigen::VectorXd& v, std::int64_t t);

 private:
  AdamConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t t_ = 0;
};

// target <- (1 - tau) * target + tau * online.
void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau);

}  // namespace clc
