#pragma once

// Bounded FIFO replay buffer with uniform sampling (with replacement).

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crl/rng.hpp"

namespace crl {

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;  // one-element vector holds a discrete index
  double reward = 0.0;
  std::vector<double> next_obs;
  bool terminated = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay: capacity must be > 0");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return data_.size(); }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);  // overwrite oldest
      head_ = (head_ + 1) % capacity_;
    }
  }

  const Transition& sample(Rng& rng) const {
    if (data_.empty()) throw std::logic_error("replay: sample from empty buffer");
    return data_[rng.uniform_int(data_.size())];
  }

  std::vector<const Transition*> sample_batch(std::size_t n, Rng& rng) const {
    std::vector<const Transition*> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(&sample(rng));
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest entry once full
  std::vector<Transition> data_;
};

}  // namespace crl
