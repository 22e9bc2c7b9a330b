#pragma once

#include <Eigen/Core>
#include <vector>

#include "clc/world.hpp"

namespace clc {

// On-policy storage for PPO. Each step carries the value estimates and flags
// needed so advantages can be computed after the fact:
//   done      - episode truly ended at this step (no bootstrap),
//   truncated - episode was cut (timeout or rollout horizon); bootstrap with
//               next_value, but stop advantage propagation across the seam.
class RolloutBuffer {
 public:
  void push(const StateVector& state, const Eigen::VectorXd& action, double log_prob,
            double reward, double value, bool done, bool truncated, double next_value);

  int size() const { return static_cast<int>(rewards_.size()); }
  void clear();

  // Fills advantages (GAE) and returns; normalizes advantages to zero mean
  // and unit variance across the whole rollout.
  void compute_gae(double gamma, double lambda);

  Eigen::MatrixXd states_matrix() const;   // 16 x n
  Eigen::MatrixXd actions_matrix() const;  // action_dim x n

  const std::vector<double>& log_probs() const { return log_probs_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }
  const std::vector<double>& raw_advantages() const { return raw_advantages_; }

 private:
  std::vector<StateVector> states_;
  std::vector<Eigen::VectorXd> actions_;
  std::vector<double> log_probs_;
  std::vector<double> rewards_;
  std::vector<double> values_;
  std::vector<char> done_;
  std::vector<char> truncated_;
  std::vector<double> next_values_;
  std::vector<double> advantages_;
  std::vector<double> raw_advantages_;
  std::vector<double> returns_;
};

}  // namespace clc
