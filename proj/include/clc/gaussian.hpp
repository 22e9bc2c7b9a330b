#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "clc/mlp.hpp"
#include "clc/rng.hpp"

namespace clc {

struct GaussianHeadConfig {
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  bool squash = false;          // tanh-map samples into (low, high)
  Eigen::VectorXd low, high;    // required iff squash
};

// Mean/log-std split of a trunk output, with the hard log-std clamp and the
// pass-through mask trainers need to zero clamped log-std gradients.
struct GaussianParams {
  Eigen::MatrixXd mean;        // d x n
  Eigen::MatrixXd log_std;     // d x n, clamped
  Eigen::MatrixXd clamp_pass;  // 1 where log_std was inside the clamp range
};

// Diagonal-Gaussian policy head over an Mlp trunk that outputs the
// concatenation (mean, log_std). With squashing on, samples are mapped
// through tanh into the open action box, and densities carry the Jacobian
// correction.
class GaussianHead {
 public:
  GaussianHead() = default;
  GaussianHead(Mlp net, GaussianHeadConfig cfg);

  int action_dim() const { return dim_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  const GaussianHeadConfig& config() const { return cfg_; }

  GaussianParams split(const Eigen::MatrixXd& trunk_out) const;

  struct Sample {
    Eigen::VectorXd action;          // env-space action (squashed if enabled)
    Eigen::VectorXd pre_squash;      // u = mean + std * noise
    Eigen::VectorXd noise;           // standard normal draw
    Eigen::VectorXd log_prob_terms;  // per-dimension log-density contributions
    double log_prob = 0.0;           // sum of the terms
  };

  // Reparameterized draw; exactly action_dim normal variates are consumed, so
  // the draw sequence is independent of downstream masking.
  Sample sample(const Eigen::VectorXd& features, Rng& rng) const;
  Sample sample(const Eigen::VectorXd& features, std::uint64_t noise_seed) const;
  // Noiseless action (the squashed mean).
  Eigen::VectorXd mean_action(const Eigen::VectorXd& features) const;

  // Per-dimension log-density terms of x under N(mean, diag(std^2)), d x n.
  static Eigen::MatrixXd diag_log_prob_terms(const Eigen::MatrixXd& mean,
                                             const Eigen::MatrixXd& log_std,
                                             const Eigen::MatrixXd& x);
  // Per-dimension ln|da/du| of the squash map, d x n; subtract from the
  // Gaussian terms of the pre-squash value to get env-space log-density.
  Eigen::MatrixXd squash_correction_terms(const Eigen::MatrixXd& u) const;

  Eigen::MatrixXd squash(const Eigen::MatrixXd& u) const;
  Eigen::MatrixXd unsquash(const Eigen::MatrixXd& a) const;

 private:
  Mlp net_;
  GaussianHeadConfig cfg_;
  int dim_ = 0;
  Eigen::VectorXd center_, half_;
};

}  // namespace clc
