#pragma once

// The contextual-MDP wrapper: picks an instance per episode, applies its
// context to the base environment, and optionally appends context values to
// the observation. Also the generalization-evaluation objective: mean
// (optionally discounted) return over a test instance set.

#include <cstring>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "crl/env.hpp"
#include "crl/sampler.hpp"

namespace crl {

struct VisibilityMode {
  enum class Kind { kHidden, kVisibleAll, kVisibleSubset };
  Kind kind = Kind::kHidden;
  std::vector<std::string> features;  // kVisibleSubset only
  bool normalize = false;

  static VisibilityMode hidden() { return {}; }
  static VisibilityMode visible_all(bool normalize = false) {
    return {Kind::kVisibleAll, {}, normalize};
  }
  static VisibilityMode visible_subset(std::vector<std::string> features,
                                       bool normalize = false) {
    return {Kind::kVisibleSubset, std::move(features), normalize};
  }

  // Number of values appended to the raw observation.
  int extra_dims(const ContextSpace& space) const {
    switch (kind) {
      case Kind::kHidden: return 0;
      case Kind::kVisibleAll: return static_cast<int>(space.size());
      case Kind::kVisibleSubset: return static_cast<int>(features.size());
    }
    return 0;
  }
};

struct InstanceSchedule {
  enum class Policy { kRoundRobin, kUniformRandom, kWeighted };
  Policy policy = Policy::kRoundRobin;
  std::uint64_t seed = 0;
};

inline std::vector<double> augment_observation(std::vector<double> raw,
                                               const Context& ctx,
                                               const ContextSpace& space,
                                               const VisibilityMode& mode) {
  switch (mode.kind) {
    case VisibilityMode::Kind::kHidden:
      return raw;
    case VisibilityMode::Kind::kVisibleAll: {
      auto cv = space.vectorize(ctx, nullptr, mode.normalize);
      raw.insert(raw.end(), cv.begin(), cv.end());
      return raw;
    }
    case VisibilityMode::Kind::kVisibleSubset: {
      auto cv = space.vectorize(ctx, &mode.features, mode.normalize);
      raw.insert(raw.end(), cv.begin(), cv.end());
      return raw;
    }
  }
  return raw;
}

class CmdpWrapper {
 public:
  CmdpWrapper(std::unique_ptr<Env> base, InstanceSet instances,
              InstanceSchedule schedule, VisibilityMode visibility)
      : base_(std::move(base)),
        instances_(std::move(instances)),
        schedule_(schedule),
        visibility_(visibility),
        schedule_rng_(Rng::substream(schedule.seed, 0)) {
    if (instances_.size() == 0)
      throw std::invalid_argument("cmdp: empty instance set");
    instances_.check();
    for (const auto& m : visibility_.features)
      base_->context_space().spec(m);  // throws on unknown names
  }

  Env& base() { return *base_; }
  const InstanceSet& instances() const { return instances_; }
  const VisibilityMode& visibility() const { return visibility_; }
  int current_instance() const { return current_instance_; }

  int observation_dim() const {
    return base_->descriptor().state_dim +
           visibility_.extra_dims(base_->context_space());
  }

  // Selects the next instance per the schedule, applies its context, resets
  // the base environment. Returns the (possibly augmented) observation.
  std::vector<double> reset(Rng& env_rng) {
    current_instance_ = next_instance();
    base_->set_context(instances_.instances[current_instance_].context);
    return augment(base_->reset(env_rng));
  }

  // Resets on one fixed instance, bypassing the schedule (evaluation use).
  std::vector<double> reset_on(int instance_id, Rng& env_rng) {
    if (instance_id < 0 || instance_id >= static_cast<int>(instances_.size()))
      throw std::out_of_range("cmdp: instance id out of range");
    current_instance_ = instance_id;
    base_->set_context(instances_.instances[instance_id].context);
    return augment(base_->reset(env_rng));
  }

  StepResult step(const Action& action) {
    StepResult r = base_->step(action);
    r.observation = augment(std::move(r.observation));
    return r;
  }

 private:
  int next_instance() {
    const int n = static_cast<int>(instances_.size());
    switch (schedule_.policy) {
      case InstanceSchedule::Policy::kRoundRobin:
        return static_cast<int>(episode_count_++ % n);
      case InstanceSchedule::Policy::kUniformRandom:
        ++episode_count_;
        return static_cast<int>(schedule_rng_.uniform_int(n));
      case InstanceSchedule::Policy::kWeighted: {
        ++episode_count_;
        double u = schedule_rng_.uniform01();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += instances_.weights[i];
          if (u < acc) return i;
        }
        return n - 1;
      }
    }
    throw std::logic_error("unreachable");
  }

  std::vector<double> augment(std::vector<double> raw) const {
    return augment_observation(std::move(raw),
                               instances_.instances[current_instance_].context,
                               base_->context_space(), visibility_);
  }

  std::unique_ptr<Env> base_;
  InstanceSet instances_;
  InstanceSchedule schedule_;
  VisibilityMode visibility_;
  Rng schedule_rng_;
  std::uint64_t episode_count_ = 0;
  int current_instance_ = 0;
};

// Deterministic policy for evaluation: observation -> action.
using Policy = std::function<Action(const std::vector<double>&)>;

struct EvalResult {
  std::vector<double> per_instance_return;  // mean over episodes, per instance
  std::vector<int> per_instance_crashes;
  double aggregate = 0.0;  // mean over instances
  int total_crashes = 0;
  int n_episodes = 0;
};

// FNV-1a over the context's names and value bit patterns. Evaluation episode
// seeds derive from this so results depend on instance content, not position.
inline std::uint64_t context_hash(const Context& ctx) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, value] : ctx.values()) {
    mix(name.data(), name.size());
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    mix(&bits, sizeof(bits));
  }
  return h;
}

// Mean over instances of the mean per-instance (discounted) return under a
// greedy policy. Episode seeds derive from eval_seed so evaluation never
// perturbs training streams.
inline EvalResult evaluate_generalization(CmdpWrapper& wrapper,
                                          const Policy& policy,
                                          int episodes_per_instance,
                                          double gamma = 1.0,
                                          std::uint64_t eval_seed = 0,
                                          int max_steps = 100000) {
  if (episodes_per_instance < 1)
    throw std::invalid_argument("evaluate: episodes_per_instance must be >= 1");
  const int n = static_cast<int>(wrapper.instances().size());
  EvalResult res;
  res.per_instance_return.resize(n, 0.0);
  res.per_instance_crashes.resize(n, 0);
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int ep = 0; ep < episodes_per_instance; ++ep) {
      const std::uint64_t instance_key =
          context_hash(wrapper.instances().instances[i].context);
      Rng rng = Rng::substream(eval_seed ^ instance_key,
                               static_cast<std::uint64_t>(ep));
      std::vector<double> obs = wrapper.reset_on(i, rng);
      double ret = 0.0, discount = 1.0;
      for (int t = 0; t < max_steps; ++t) {
        StepResult r = wrapper.step(policy(obs));
        ret += discount * r.reward;
        discount *= gamma;
        if (r.info.count("crashed") && r.info.at("crashed") != 0.0)
          ++res.per_instance_crashes[i];
        if (r.done()) break;
        obs = std::move(r.observation);
      }
      total += ret;
      ++res.n_episodes;
    }
    res.per_instance_return[i] = total / episodes_per_instance;
    res.total_crashes += res.per_instance_crashes[i];
  }
  res.aggregate = std::accumulate(res.per_instance_return.begin(),
                                  res.per_instance_return.end(), 0.0) /
                  n;
  return res;
}

}  // namespace crl
