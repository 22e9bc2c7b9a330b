#include "clc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clc/rng.hpp"

namespace clc {

ScalarLoss quadratic_loss() {
  ScalarLoss loss;
  loss.value = [](const Eigen::MatrixXd& y) { return 0.5 * y.squaredNorm(); };
  loss.grad = [](const Eigen::MatrixXd& y) { return y; };
  return loss;
}

namespace {

// ReLU activation sign pattern; identical patterns mean both perturbed
// evaluations sat on the same linear piece.
bool same_relu_pattern(const Mlp& net, const std::vector<Eigen::MatrixXd>& a,
                       const std::vector<Eigen::MatrixXd>& b) {
  for (int l = 0; l < net.layer_count(); ++l) {
    if (net.activation(l) != Activation::ReLU) continue;
    // trace entry l + 1 is the post-activation of layer l
    const auto pa = (a[l + 1].array() > 0.0);
    const auto pb = (b[l + 1].array() > 0.0);
    if (!(pa == pb).all()) return false;
  }
  return true;
}

}  // namespace

GradCheckReport gradcheck_mlp(const Mlp& net, const Eigen::MatrixXd& input,
                              const ScalarLoss& loss, const GradCheckConfig& cfg) {
  Mlp work = net;
  work.zero_grad();
  const Eigen::MatrixXd out = work.forward(input);
  work.backward(loss.grad(out));
  const Eigen::VectorXd analytic = work.grads();
  const Eigen::VectorXd base = net.params();

  std::vector<Eigen::Index> indices(static_cast<std::size_t>(base.size()));
  std::iota(indices.begin(), indices.end(), 0);
  if (cfg.max_indices > 0 && cfg.max_indices < static_cast<int>(indices.size())) {
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.max_indices; ++i) {  // partial Fisher-Yates
      const auto j = i + static_cast<Eigen::Index>(
                             rng.uniform_int(indices.size() - static_cast<std::size_t>(i)));
      std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
    }
    indices.resize(static_cast<std::size_t>(cfg.max_indices));
  }

  GradCheckReport report;
  Eigen::VectorXd p = base;
  for (const Eigen::Index idx : indices) {
    p(idx) = base(idx) + cfg.step;
    work.set_params(p);
    const auto trace_hi = work.eval_trace(input);
    p(idx) = base(idx) - cfg.step;
    work.set_params(p);
    const auto trace_lo = work.eval_trace(input);
    p(idx) = base(idx);

    if (!same_relu_pattern(net, trace_hi, trace_lo)) {
      ++report.skipped;
      continue;
    }
    const double fd =
        (loss.value(trace_hi.back()) - loss.value(trace_lo.back())) / (2.0 * cfg.step);
    const double an = analytic(idx);
    const double scale = std::max({1e-4, std::abs(fd), std::abs(an)});
    const double rel = std::abs(fd - an) / scale;
    ++report.checked;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_index = idx;
    }
  }
  report.passed = report.checked > 0 && report.max_rel_err < cfg.tolerance;
  return report;
}

std::vector<ArchitectureCheck> gradcheck_shipped_architectures(
    int width, std::uint64_t seed, int max_indices) {
  // State is 16-wide; the widest action interface is 4. Critics consume the
  // state/action concatenation, gaussian trunks emit (mean, log_std) pairs.
  struct Shape {
    const char* name;
    int in;
    int out;
    Activation final_act;
  };
  const Shape shapes[] = {
      {"deterministic_actor", 16, 4, Activation::Tanh},
      {"q_critic", 20, 1, Activation::Identity},
      {"gaussian_actor", 16, 8, Activation::Identity},
      {"state_value", 16, 1, Activation::Identity},
  };

  GradCheckConfig cfg;
  cfg.max_indices = max_indices;
  const ScalarLoss loss = quadratic_loss();

  std::vector<ArchitectureCheck> checks;
  std::uint64_t stream = 0;
  for (const Shape& s : shapes) {
    Mlp net(s.in, {{width, Activation::ReLU},
                   {width, Activation::ReLU},
                   {s.out, s.final_act}});
    Rng init(derive_seed(seed, stream++));
    net.init(init);
    Eigen::MatrixXd input(s.in, 4);
    Rng in_rng(derive_seed(seed, stream++));
    for (Eigen::Index j = 0; j < input.cols(); ++j) {
      for (Eigen::Index i = 0; i < input.rows(); ++i) {
        input(i, j) = in_rng.normal();
      }
    }
    cfg.seed = derive_seed(seed, stream++);
    checks.push_back({std::string(s.name) + "_w" + std::to_string(width),
                      gradcheck_mlp(net, input, loss, cfg)});
  }
  return checks;
}

}  // namespace clc
