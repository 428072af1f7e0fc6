#pragma once

// Environment interface shared by all contextual environments: apply a
// context, reset with an explicit RNG, step with a discrete or continuous
// action.

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crl/context.hpp"
#include "crl/rng.hpp"

namespace crl {

// Discrete index or continuous vector.
using Action = std::variant<int, std::vector<double>>;

inline int discrete(const Action& a) {
  if (const int* i = std::get_if<int>(&a)) return *i;
  throw std::invalid_argument("expected a discrete action");
}

inline const std::vector<double>& continuous(const Action& a) {
  if (const auto* v = std::get_if<std::vector<double>>(&a)) return *v;
  throw std::invalid_argument("expected a continuous action");
}

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  std::map<std::string, double> info;

  bool done() const { return terminated || truncated; }
};

struct EnvDescriptor {
  enum class ActionKind { kDiscrete, kContinuous };
  ActionKind action_kind = ActionKind::kDiscrete;
  int n_actions = 0;        // discrete
  int action_dim = 0;       // continuous
  double action_low = 0.0, action_high = 0.0;
  int state_dim = 0;
  int n_cf = 0;
  int n_cf_reward = 0;
  int n_cf_dynamics = 0;
};

class Env {
 public:
  virtual ~Env() = default;

  virtual const std::string& name() const = 0;
  virtual const ContextSpace& context_space() const = 0;
  virtual EnvDescriptor descriptor() const = 0;

  // Validates and installs the context; takes effect at the next reset.
  virtual void set_context(const Context& ctx) = 0;
  virtual const Context& context() const = 0;

  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(const Action& action) = 0;
};

}  // namespace crl
