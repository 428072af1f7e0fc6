#pragma once

// DQN with experience replay, a hard-synced target network and a linear
// epsilon schedule. Hyperparameter defaults follow the tuned
// stable-baselines-zoo DQN values.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "crl/checkpoint.hpp"
#include "crl/mlp.hpp"
#include "crl/replay.hpp"
#include "crl/rng.hpp"

namespace crl {

struct DqnConfig {
  double learning_rate = 6.3e-4;
  int batch_size = 128;
  int buffer_size = 50000;
  int learning_starts = 0;
  double gamma = 0.99;
  int target_update_interval = 250;
  int train_freq = 4;
  // -1: one gradient step per environment step collected since last update
  int gradient_steps = -1;
  double exploration_fraction = 0.12;
  double exploration_final_eps = 0.1;
  std::vector<int> hidden = {256, 256};
};

class DqnAgent {
 public:
  using Net = Mlp<float>;
  using MatF = Net::Mat;

  DqnAgent(int obs_dim, int n_actions, DqnConfig cfg, std::uint64_t seed,
           std::int64_t total_steps)
      : cfg_(cfg),
        obs_dim_(obs_dim),
        n_actions_(n_actions),
        total_steps_(total_steps),
        buffer_(cfg.buffer_size),
        init_rng_(Rng::substream(seed, 1)),
        explore_rng_(Rng::substream(seed, 2)),
        replay_rng_(Rng::substream(seed, 3)) {
    std::vector<int> sizes = {obs_dim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(n_actions);
    online_ = Net::make(sizes, Activation::kRelu, OutputActivation::kIdentity,
                        1.0f, init_rng_);
    target_ = online_;
    opt_.emplace(online_, cfg.learning_rate);
  }

  int n_actions() const { return n_actions_; }
  int obs_dim() const { return obs_dim_; }
  const Net& online() const { return online_; }
  const Net& target() const { return target_; }
  std::int64_t env_steps() const { return env_steps_; }

  double epsilon(std::int64_t step) const {
    const double end_step = cfg_.exploration_fraction * total_steps_;
    if (end_step <= 0) return cfg_.exploration_final_eps;
    if (step >= end_step) return cfg_.exploration_final_eps;
    const double frac = static_cast<double>(step) / end_step;
    return 1.0 + frac * (cfg_.exploration_final_eps - 1.0);
  }

  int act(const std::vector<double>& obs, bool explore) {
    if (static_cast<int>(obs.size()) != obs_dim_)
      throw std::invalid_argument("dqn: observation dim mismatch");
    if (explore && explore_rng_.uniform01() < epsilon(env_steps_))
      return static_cast<int>(explore_rng_.uniform_int(n_actions_));
    return greedy(obs);
  }

  int greedy(const std::vector<double>& obs) const {
    Eigen::VectorXf x(obs_dim_);
    for (int i = 0; i < obs_dim_; ++i) x[i] = static_cast<float>(obs[i]);
    Eigen::VectorXf q = online_.forward(x);
    int best = 0;
    q.maxCoeff(&best);
    return best;
  }

  // One environment interaction: store the transition, then train / sync per
  // the schedule.
  void observe(Transition t) {
    buffer_.push(std::move(t));
    ++env_steps_;
    ++steps_since_train_;
    if (env_steps_ >= cfg_.learning_starts &&
        buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size) &&
        steps_since_train_ >= cfg_.train_freq) {
      const int n_steps = cfg_.gradient_steps > 0
                              ? cfg_.gradient_steps
                              : static_cast<int>(steps_since_train_);
      for (int i = 0; i < n_steps; ++i) gradient_step();
      steps_since_train_ = 0;
    }
    if (env_steps_ % cfg_.target_update_interval == 0) target_ = online_;
  }

  // One Adam step on the mean squared TD error of a uniform batch. Returns
  // the loss.
  double gradient_step() {
    const int B = cfg_.batch_size;
    auto batch = buffer_.sample_batch(B, replay_rng_);
    return update_on_batch(batch);
  }

  // Exposed for tests with hand-built batches.
  double update_on_batch(const std::vector<const Transition*>& batch) {
    const int B = static_cast<int>(batch.size());
    MatF obs(obs_dim_, B), next_obs(obs_dim_, B);
    for (int j = 0; j < B; ++j) {
      for (int i = 0; i < obs_dim_; ++i) {
        obs(i, j) = static_cast<float>(batch[j]->obs[i]);
        next_obs(i, j) = static_cast<float>(batch[j]->next_obs[i]);
      }
    }
    MatF q_next = target_.forward(next_obs);
    Net::Cache cache;
    MatF q = online_.forward_cached(obs, cache);

    MatF upstream = MatF::Zero(n_actions_, B);
    double loss = 0.0;
    for (int j = 0; j < B; ++j) {
      const int a = static_cast<int>(batch[j]->action[0]);
      double y = batch[j]->reward;
      if (!batch[j]->terminated)
        y += cfg_.gamma * q_next.col(j).maxCoeff();
      const double td = q(a, j) - y;
      loss += td * td;
      upstream(a, j) = static_cast<float>(2.0 * td / B);
    }
    loss /= B;

    auto grads = online_.zero_grads();
    online_.backward(cache, upstream, grads);
    opt_->step(online_, grads);
    return loss;
  }

  ReplayBuffer& buffer() { return buffer_; }

  Checkpoint checkpoint(std::uint64_t seed, const std::string& config_hash) const {
    Checkpoint ck;
    ck.header = {{"agent", "dqn"},
                 {"sizes", online_.sizes()},
                 {"config_hash", config_hash},
                 {"seed", seed}};
    ck.blobs.push_back(online_.flatten());
    ck.blobs.push_back(target_.flatten());
    return ck;
  }

  void restore(const Checkpoint& ck) {
    if (ck.header.at("agent") != "dqn")
      throw std::runtime_error("checkpoint is not a DQN checkpoint");
    if (ck.header.at("sizes").get<std::vector<int>>() != online_.sizes())
      throw std::runtime_error("checkpoint architecture mismatch");
    online_.unflatten(ck.blobs.at(0));
    target_.unflatten(ck.blobs.at(1));
  }

 private:
  DqnConfig cfg_;
  int obs_dim_, n_actions_;
  std::int64_t total_steps_;
  ReplayBuffer buffer_;
  Rng init_rng_, explore_rng_, replay_rng_;
  Net online_, target_;
  std::optional<Adam<float>> opt_;
  std::int64_t env_steps_ = 0;
  std::int64_t steps_since_train_ = 0;
};

}  // namespace crl
