#include "clc/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace clc {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t warmup)
    : capacity_(capacity), warmup_(warmup) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (warmup == 0 || warmup > capacity) {
    throw std::invalid_argument("replay warm-up must lie in [1, capacity]");
  }
  storage_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (!t.state.allFinite() || !t.next_state.allFinite() || !t.action.allFinite() ||
      !std::isfinite(t.reward)) {
    throw std::invalid_argument("non-finite transition rejected");
  }
  if (action_dim_ < 0) {
    action_dim_ = t.action.size();
  } else if (t.action.size() != action_dim_) {
    throw std::invalid_argument("transition action dimension changed mid-buffer");
  }
  if (storage_.size() < capacity_) {
    storage_.push_back(t);
  } else {
    storage_[next_] = t;
    next_ = (next_ + 1) % capacity_;
  }
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (!warm()) throw std::logic_error("replay sampled before warm-up");
  if (n == 0 || n > storage_.size()) {
    throw std::logic_error("replay batch size must lie in [1, occupancy]");
  }
  Batch b;
  const auto count = static_cast<Eigen::Index>(n);
  b.states.resize(16, count);
  b.actions.resize(action_dim_, count);
  b.rewards.resize(count);
  b.next_states.resize(16, count);
  b.done.resize(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Transition& t = storage_[rng.uniform_int(storage_.size())];
    b.states.col(j) = t.state;
    b.actions.col(j) = t.action;
    b.rewards(j) = t.reward;
    b.next_states.col(j) = t.next_state;
    b.done(j) = t.done ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace clc
