#pragma once

// DDPG for continuous actions: deterministic actor with tanh-scaled output,
// Q critic on (state, action), soft-updated target copies and Gaussian
// exploration noise. Hyperparameter defaults are this project's pinned
// desk-scale values.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "crl/checkpoint.hpp"
#include "crl/mlp.hpp"
#include "crl/replay.hpp"
#include "crl/rng.hpp"

namespace crl {

struct DdpgConfig {
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  int batch_size = 128;
  int buffer_size = 100000;
  int learning_starts = 100;
  double gamma = 0.99;
  double tau = 0.005;
  // exploration noise std as a fraction of the action half-range
  double noise_sigma = 0.1;
  int train_freq = 1;
  std::vector<int> hidden = {64, 64};
};

class DdpgAgent {
 public:
  using Net = Mlp<float>;
  using MatF = Net::Mat;

  DdpgAgent(int obs_dim, int action_dim, double action_low, double action_high,
            DdpgConfig cfg, std::uint64_t seed)
      : cfg_(cfg),
        obs_dim_(obs_dim),
        action_dim_(action_dim),
        action_low_(action_low),
        action_high_(action_high),
        buffer_(cfg.buffer_size),
        init_rng_(Rng::substream(seed, 11)),
        explore_rng_(Rng::substream(seed, 12)),
        replay_rng_(Rng::substream(seed, 13)) {
    if (action_low >= action_high)
      throw std::invalid_argument("ddpg: bad action range");
    action_center_ = 0.5 * (action_low + action_high);
    action_scale_ = 0.5 * (action_high - action_low);

    std::vector<int> actor_sizes = {obs_dim};
    actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_sizes.push_back(action_dim);
    actor_ = Net::make(actor_sizes, Activation::kRelu,
                       OutputActivation::kTanhScaled,
                       static_cast<float>(action_scale_), init_rng_);

    std::vector<int> critic_sizes = {obs_dim + action_dim};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);
    critic_ = Net::make(critic_sizes, Activation::kRelu,
                        OutputActivation::kIdentity, 1.0f, init_rng_);

    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_opt_.emplace(actor_, cfg.actor_lr);
    critic_opt_.emplace(critic_, cfg.critic_lr);
  }

  const Net& actor() const { return actor_; }
  const Net& critic() const { return critic_; }
  const Net& actor_target() const { return actor_target_; }
  const Net& critic_target() const { return critic_target_; }
  std::int64_t env_steps() const { return env_steps_; }

  std::vector<double> act(const std::vector<double>& obs, bool explore) {
    std::vector<double> a = greedy(obs);
    if (explore) {
      const double sigma = cfg_.noise_sigma * action_scale_;
      for (auto& ai : a)
        ai = std::clamp(ai + explore_rng_.normal(0.0, sigma), action_low_,
                        action_high_);
    }
    return a;
  }

  std::vector<double> greedy(const std::vector<double>& obs) const {
    if (static_cast<int>(obs.size()) != obs_dim_)
      throw std::invalid_argument("ddpg: observation dim mismatch");
    Eigen::VectorXf x(obs_dim_);
    for (int i = 0; i < obs_dim_; ++i) x[i] = static_cast<float>(obs[i]);
    Eigen::VectorXf out = actor_.forward(x);
    std::vector<double> a(action_dim_);
    for (int i = 0; i < action_dim_; ++i)
      a[i] = std::clamp(static_cast<double>(out[i]) + action_center_,
                        action_low_, action_high_);
    return a;
  }

  void observe(Transition t) {
    buffer_.push(std::move(t));
    ++env_steps_;
    ++steps_since_train_;
    if (env_steps_ >= cfg_.learning_starts &&
        buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size) &&
        steps_since_train_ >= cfg_.train_freq) {
      const int n_steps = static_cast<int>(steps_since_train_);
      for (int i = 0; i < n_steps; ++i) gradient_step();
      steps_since_train_ = 0;
    }
  }

  void gradient_step() {
    auto batch = buffer_.sample_batch(cfg_.batch_size, replay_rng_);
    update_on_batch(batch);
  }

  // Critic regression on y = r + gamma (1-d) Q'(s', mu'(s')), actor ascent on
  // Q(s, mu(s)), then soft target updates. Exposed for tests.
  void update_on_batch(const std::vector<const Transition*>& batch) {
    const int B = static_cast<int>(batch.size());
    MatF obs(obs_dim_, B), next_obs(obs_dim_, B);
    MatF critic_in(obs_dim_ + action_dim_, B);
    for (int j = 0; j < B; ++j) {
      for (int i = 0; i < obs_dim_; ++i) {
        obs(i, j) = static_cast<float>(batch[j]->obs[i]);
        next_obs(i, j) = static_cast<float>(batch[j]->next_obs[i]);
        critic_in(i, j) = obs(i, j);
      }
      for (int i = 0; i < action_dim_; ++i)
        critic_in(obs_dim_ + i, j) =
            static_cast<float>(batch[j]->action[i] - action_center_);
    }

    // critic targets
    MatF next_a = actor_target_.forward(next_obs);
    MatF target_in(obs_dim_ + action_dim_, B);
    target_in.topRows(obs_dim_) = next_obs;
    target_in.bottomRows(action_dim_) = next_a;
    MatF q_next = critic_target_.forward(target_in);

    Net::Cache critic_cache;
    MatF q = critic_.forward_cached(critic_in, critic_cache);
    MatF upstream(1, B);
    for (int j = 0; j < B; ++j) {
      double y = batch[j]->reward;
      if (!batch[j]->terminated) y += cfg_.gamma * q_next(0, j);
      upstream(0, j) = static_cast<float>(2.0 * (q(0, j) - y) / B);
    }
    auto critic_grads = critic_.zero_grads();
    critic_.backward(critic_cache, upstream, critic_grads);
    critic_opt_->step(critic_, critic_grads);

    // actor: maximize mean Q(s, mu(s))
    Net::Cache actor_cache;
    MatF mu = actor_.forward_cached(obs, actor_cache);
    MatF actor_critic_in(obs_dim_ + action_dim_, B);
    actor_critic_in.topRows(obs_dim_) = obs;
    actor_critic_in.bottomRows(action_dim_) = mu;
    Net::Cache q_cache;
    critic_.forward_cached(actor_critic_in, q_cache);
    MatF minus_ones = MatF::Constant(1, B, -1.0f / B);
    auto scratch = critic_.zero_grads();  // critic grads discarded
    MatF dinput;
    critic_.backward(q_cache, minus_ones, scratch, &dinput);
    MatF da = dinput.bottomRows(action_dim_);
    auto actor_grads = actor_.zero_grads();
    actor_.backward(actor_cache, da, actor_grads);
    actor_opt_->step(actor_, actor_grads);

    soft_update(actor_target_, actor_, static_cast<float>(cfg_.tau));
    soft_update(critic_target_, critic_, static_cast<float>(cfg_.tau));
  }

  ReplayBuffer& buffer() { return buffer_; }

  Checkpoint checkpoint(std::uint64_t seed, const std::string& config_hash) const {
    Checkpoint ck;
    ck.header = {{"agent", "ddpg"},
                 {"actor_sizes", actor_.sizes()},
                 {"critic_sizes", critic_.sizes()},
                 {"action_low", action_low_},
                 {"action_high", action_high_},
                 {"config_hash", config_hash},
                 {"seed", seed}};
    ck.blobs.push_back(actor_.flatten());
    ck.blobs.push_back(critic_.flatten());
    ck.blobs.push_back(actor_target_.flatten());
    ck.blobs.push_back(critic_target_.flatten());
    return ck;
  }

  void restore(const Checkpoint& ck) {
    if (ck.header.at("agent") != "ddpg")
      throw std::runtime_error("checkpoint is not a DDPG checkpoint");
    if (ck.header.at("actor_sizes").get<std::vector<int>>() != actor_.sizes() ||
        ck.header.at("critic_sizes").get<std::vector<int>>() != critic_.sizes())
      throw std::runtime_error("checkpoint architecture mismatch");
    actor_.unflatten(ck.blobs.at(0));
    critic_.unflatten(ck.blobs.at(1));
    actor_target_.unflatten(ck.blobs.at(2));
    critic_target_.unflatten(ck.blobs.at(3));
  }

 private:
  DdpgConfig cfg_;
  int obs_dim_, action_dim_;
  double action_low_, action_high_, action_center_ = 0.0, action_scale_ = 1.0;
  ReplayBuffer buffer_;
  Rng init_rng_, explore_rng_, replay_rng_;
  Net actor_, critic_, actor_target_, critic_target_;
  std::optional<Adam<float>> actor_opt_, critic_opt_;
  std::int64_t env_steps_ = 0;
  std::int64_t steps_since_train_ = 0;
};

}  // namespace crl
