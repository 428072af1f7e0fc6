#pragma once

// Contextual pendulum swing-up. Discrete-time update:
//   theta_dot' = theta_dot + (-(3g/2l) sin(theta + pi) + 3/(m l^2) u) dt
//   theta'     = theta + theta_dot' dt
// with theta_dot clamped to +-max_speed. Continuous torque in [-2, 2].

#include <cmath>
#include <stdexcept>

#include "crl/env.hpp"

namespace crl {

inline double wrap_angle(double theta) {
  // into [-pi, pi)
  double t = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  return t - M_PI;
}

struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

class PendulumEnv final : public Env {
 public:
  static constexpr int kHorizon = 200;
  static constexpr double kMaxTorque = 2.0;

  PendulumEnv() : ctx_(space().default_context()) {}

  static const ContextSpace& space() {
    static const ContextSpace s(
        "pendulum",
        {{"dt", 0.05, 0.0, kInf},
         {"g", 10.0, 0.0, kInf},
         {"l", 1.0, 1e-6, kInf},
         {"m", 1.0, 1e-6, kInf},
         {"max_speed", 8.0, -kInf, kInf}});
    return s;
  }

  const std::string& name() const override {
    static const std::string n = "pendulum";
    return n;
  }
  const ContextSpace& context_space() const override { return space(); }

  EnvDescriptor descriptor() const override {
    EnvDescriptor d;
    d.action_kind = EnvDescriptor::ActionKind::kContinuous;
    d.action_dim = 1;
    d.action_low = -kMaxTorque;
    d.action_high = kMaxTorque;
    d.state_dim = 3;
    d.n_cf = 5;
    d.n_cf_reward = 0;
    d.n_cf_dynamics = 5;
    return d;
  }

  void set_context(const Context& ctx) override { ctx_ = space().validate(ctx); }
  const Context& context() const override { return ctx_; }

  std::vector<double> reset(Rng& rng) override {
    state_.theta = rng.uniform(-M_PI, M_PI);
    state_.theta_dot = rng.uniform(-1.0, 1.0);
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const Action& action) override {
    if (done_) throw std::logic_error("step after episode end");
    double u = continuous(action).at(0);
    u = std::clamp(u, -kMaxTorque, kMaxTorque);

    const double g = ctx_.get("g"), l = ctx_.get("l"), m = ctx_.get("m");
    const double dt = ctx_.get("dt"), max_speed = ctx_.get("max_speed");

    const double th = state_.theta;
    const double reward = -(wrap_angle(th) * wrap_angle(th) +
                            0.1 * state_.theta_dot * state_.theta_dot +
                            0.001 * u * u);

    double thdot = state_.theta_dot +
                   (-(3.0 * g / (2.0 * l)) * std::sin(th + M_PI) +
                    3.0 / (m * l * l) * u) *
                       dt;
    thdot = std::clamp(thdot, -max_speed, max_speed);
    state_.theta = th + thdot * dt;
    state_.theta_dot = thdot;

    if (!std::isfinite(state_.theta) || !std::isfinite(state_.theta_dot))
      throw std::runtime_error("pendulum: non-finite state");

    ++steps_;
    StepResult r;
    r.observation = observe();
    r.reward = reward;
    r.terminated = false;
    r.truncated = steps_ >= kHorizon;
    done_ = r.done();
    return r;
  }

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& s) {
    state_ = s;
    done_ = false;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> observe() const {
    return {std::cos(state_.theta), std::sin(state_.theta), state_.theta_dot};
  }

  Context ctx_;
  PendulumState state_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace crl
