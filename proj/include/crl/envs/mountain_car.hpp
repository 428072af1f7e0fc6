#pragma once

// Contextual mountain car. Canonical update
//   v' = clip(v + (a-1) force - cos(3p) gravity, +-max_speed)
//   p' = clip(p + v', [min_position, max_position])
// The context table prints force/gravity as 0.00 (2-decimal rounding of the
// canonical 0.001 / 0.0025); defaults here use the canonical values.

#include <cmath>
#include <stdexcept>

#include "crl/env.hpp"

namespace crl {

struct MountainCarState {
  double position = 0.0;
  double velocity = 0.0;
};

class MountainCarEnv final : public Env {
 public:
  static constexpr int kHorizon = 200;

  MountainCarEnv() : ctx_(space().default_context()) {}

  static const ContextSpace& space() {
    static const ContextSpace s(
        "mountaincar",
        {{"force", 0.001, -kInf, kInf},
         {"goal_position", 0.5, -kInf, kInf},
         {"goal_velocity", 0.0, -kInf, kInf},
         {"gravity", 0.0025, 0.0, kInf},
         {"max_position", 0.6, -kInf, kInf},
         {"max_speed", 0.07, 0.0, kInf},
         {"min_position", -1.2, -kInf, kInf},
         {"start_position", -0.5, -1.5, 0.5},
         {"start_position_std", 0.1, 0.0, kInf},
         {"start_velocity", 0.0, -kInf, kInf},
         {"start_velocity_std", 0.0, 0.0, kInf}});
    return s;
  }

  const std::string& name() const override {
    static const std::string n = "mountaincar";
    return n;
  }
  const ContextSpace& context_space() const override { return space(); }

  EnvDescriptor descriptor() const override {
    EnvDescriptor d;
    d.action_kind = EnvDescriptor::ActionKind::kDiscrete;
    d.n_actions = 3;
    d.state_dim = 2;
    d.n_cf = 11;
    d.n_cf_reward = 2;  // goal_position, goal_velocity
    d.n_cf_dynamics = 9;
    return d;
  }

  void set_context(const Context& ctx) override { ctx_ = space().validate(ctx); }
  const Context& context() const override { return ctx_; }

  std::vector<double> reset(Rng& rng) override {
    const double p_min = ctx_.get("min_position"), p_max = ctx_.get("max_position");
    const double v_max = ctx_.get("max_speed");
    state_.position = std::clamp(
        rng.normal(ctx_.get("start_position"), ctx_.get("start_position_std")),
        p_min, p_max);
    state_.velocity = std::clamp(
        rng.normal(ctx_.get("start_velocity"), ctx_.get("start_velocity_std")),
        -v_max, v_max);
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const Action& action) override {
    if (done_) throw std::logic_error("step after episode end");
    const int a = discrete(action);
    if (a < 0 || a > 2) throw std::invalid_argument("mountaincar: action in {0,1,2}");

    const double force = ctx_.get("force");
    const double gravity = ctx_.get("gravity");
    const double max_speed = ctx_.get("max_speed");
    const double min_pos = ctx_.get("min_position");
    const double max_pos = ctx_.get("max_position");

    double v = state_.velocity + (a - 1) * force -
               std::cos(3.0 * state_.position) * gravity;
    v = std::clamp(v, -max_speed, max_speed);
    double p = std::clamp(state_.position + v, min_pos, max_pos);
    if (p == min_pos && v < 0) v = 0.0;
    state_.position = p;
    state_.velocity = v;

    if (!std::isfinite(p) || !std::isfinite(v))
      throw std::runtime_error("mountaincar: non-finite state");

    ++steps_;
    StepResult r;
    r.observation = observe();
    r.reward = -1.0;
    r.terminated = p >= ctx_.get("goal_position") && v >= ctx_.get("goal_velocity");
    r.truncated = !r.terminated && steps_ >= kHorizon;
    done_ = r.done();
    return r;
  }

  const MountainCarState& state() const { return state_; }
  void set_state(const MountainCarState& s) {
    state_ = s;
    done_ = false;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> observe() const { return {state_.position, state_.velocity}; }

  Context ctx_;
  MountainCarState state_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace crl
