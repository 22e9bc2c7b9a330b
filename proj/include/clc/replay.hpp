#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "clc/rng.hpp"
#include "clc/world.hpp"

namespace clc {

struct Transition {
  StateVector state = StateVector::Zero();
  Eigen::VectorXd action;
  double reward = 0.0;
  StateVector next_state = StateVector::Zero();
  // True only for genuine terminal events; a timeout keeps bootstrapping.
  bool done = false;
};

// Ring buffer with FIFO eviction and seeded uniform-with-replacement
// sampling. Sampling is refused until the warm-up threshold is met.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t warmup);

  void push(const Transition& t);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool warm() const { return storage_.size() >= warmup_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

  struct Batch {
    Eigen::MatrixXd states;       // 16 x n
    Eigen::MatrixXd actions;      // action_dim x n
    Eigen::VectorXd rewards;      // n
    Eigen::MatrixXd next_states;  // 16 x n
    Eigen::VectorXd done;         // n, 1.0 when terminal
    Eigen::Index count() const { return rewards.size(); }
  };

  Batch sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t warmup_;
  std::size_t next_ = 0;  // ring write position once full
  Eigen::Index action_dim_ = -1;
  std::vector<Transition> storage_;
};

}  // namespace clc
