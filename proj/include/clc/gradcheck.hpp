#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "clc/mlp.hpp"

namespace clc {

struct ScalarLoss {
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> grad;  // dL/d(output)
};

// L = 0.5 * sum(Y^2): smooth, nonzero curvature everywhere.
ScalarLoss quadratic_loss();

struct GradCheckConfig {
  double step = 1e-5;        // central-difference half-step
  double tolerance = 1e-4;
  int max_indices = 0;       // parameters checked per net; 0 = all
  std::uint64_t seed = 0;    // index subsampling
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  Eigen::Index worst_index = -1;
  int checked = 0;
  int skipped = 0;  // perturbation crossed a ReLU kink; finite differences invalid there
  bool passed = false;
};

// Central finite differences against backward() on a copy of the net.
// Perturbations that flip any ReLU activation pattern are skipped rather than
// compared: the loss is not differentiable across the kink.
GradCheckReport gradcheck_mlp(const Mlp& net, const Eigen::MatrixXd& input,
                              const ScalarLoss& loss, const GradCheckConfig& cfg);

struct ArchitectureCheck {
  std::string name;
  GradCheckReport report;
};

// Every network shape the trainers instantiate, at the given hidden width.
std::vector<ArchitectureCheck> gradcheck_shipped_architectures(
    int width, std::uint64_t seed, int max_indices);

}  // namespace clc
