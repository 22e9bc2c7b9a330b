#include "clc/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

void RolloutBuffer::push(const StateVector& state, const Eigen::VectorXd& action,
                         double log_prob, double reward, double value, bool done,
                         bool truncated, double next_value) {
  if (!state.allFinite() || !action.allFinite() || !std::isfinite(log_prob) ||
      !std::isfinite(reward) || !std::isfinite(value) || !std::isfinite(next_value)) {
    throw std::invalid_argument("non-finite rollout step rejected");
  }
  if (done && truncated) {
    throw std::invalid_argument("a step cannot be both terminal and truncated");
  }
  states_.push_back(state);
  actions_.push_back(action);
  log_probs_.push_back(log_prob);
  rewards_.push_back(reward);
  values_.push_back(value);
  done_.push_back(done ? 1 : 0);
  truncated_.push_back(truncated ? 1 : 0);
  next_values_.push_back(next_value);
}

void RolloutBuffer::clear() {
  states_.clear();
  actions_.clear();
  log_probs_.clear();
  rewards_.clear();
  values_.clear();
  done_.clear();
  truncated_.clear();
  next_values_.clear();
  advantages_.clear();
  raw_advantages_.clear();
  returns_.clear();
}

void RolloutBuffer::compute_gae(double gamma, double lambda) {
  const int n = size();
  if (n == 0) throw std::logic_error("cannot compute advantages of an empty rollout");
  advantages_.assign(n, 0.0);
  returns_.assign(n, 0.0);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    // Value beyond this step: zero at a true terminal, the recorded bootstrap
    // at a truncation, otherwise the next stored step's estimate.
    double next_v;
    bool boundary;
    if (done_[t]) {
      next_v = 0.0;
      boundary = true;
    } else if (truncated_[t] || t + 1 == n) {
      next_v = next_values_[t];
      boundary = true;
    } else {
      next_v = values_[t + 1];
      boundary = false;
    }
    const double delta = rewards_[t] + gamma * next_v - values_[t];
    carry = delta + (boundary ? 0.0 : gamma * lambda * carry);
    advantages_[t] = carry;
    returns_[t] = advantages_[t] + values_[t];
  }
  raw_advantages_ = advantages_;
  double mean = 0.0;
  for (double a : advantages_) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages_) var += (a - mean) * (a - mean);
  var /= n;
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages_) a = (a - mean) * inv;
}

Eigen::MatrixXd RolloutBuffer::states_matrix() const {
  Eigen::MatrixXd m(16, size());
  for (int j = 0; j < size(); ++j) m.col(j) = states_[static_cast<std::size_t>(j)];
  return m;
}

Eigen::MatrixXd RolloutBuffer::actions_matrix() const {
  if (actions_.empty()) return {};
  Eigen::MatrixXd m(actions_.front().size(), size());
  for (int j = 0; j < size(); ++j) m.col(j) = actions_[static_cast<std::size_t>(j)];
  return m;
}

}  // namespace clc
