#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flc/rng.hpp"
#include "flc/types.hpp"

namespace flc {

struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
  double reward{0.0};
  Eigen::VectorXd next_obs;
  bool done{false};
};

struct Batch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::MatrixXd action;    // act_dim x B
  Eigen::VectorXd reward;    // B
  Eigen::MatrixXd next_obs;  // obs_dim x B
  Eigen::VectorXd done;      // B, 0/1
};

// Fixed-capacity ring buffer with uniform (with-replacement) sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity 0");
    storage_.reserve(capacity);
  }

  void store(Transition t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (storage_.empty())
      throw std::logic_error("ReplayBuffer: sampling from empty buffer");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.uniform_int(storage_.size());
    return idx;
  }

  Batch sample(std::size_t n, Rng& rng) const {
    const auto idx = sample_indices(n, rng);
    const auto& first = storage_[idx[0]];
    Batch b;
    b.obs.resize(first.obs.size(), n);
    b.action.resize(first.action.size(), n);
    b.reward.resize(n);
    b.next_obs.resize(first.next_obs.size(), n);
    b.done.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& t = storage_[idx[j]];
      b.obs.col(j) = t.obs;
      b.action.col(j) = t.action;
      b.reward[j] = t.reward;
      b.next_obs.col(j) = t.next_obs;
      b.done[j] = t.done ? 1.0 : 0.0;
    }
    return b;
  }

 private:
  std::size_t capacity_;
  std::size_t head_{0};  // next slot to overwrite once full
  std::vector<Transition> storage_;
};

}  // namespace flc
