#pragma once

// Contextual cart-pole balancing. Standard cart-pole equations integrated
// with semi-implicit Euler at dt = update_interval. pole_length is the
// half-length of the pole, matching the canonical formulation.

#include <cmath>
#include <stdexcept>

#include "crl/env.hpp"

namespace crl {

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

class CartPoleEnv final : public Env {
 public:
  static constexpr int kHorizon = 500;
  static constexpr double kXThreshold = 2.4;
  static constexpr double kThetaThreshold = 12.0 * 2.0 * M_PI / 360.0;

  CartPoleEnv() : ctx_(space().default_context()) {}

  static const ContextSpace& space() {
    static const ContextSpace s(
        "cartpole",
        {{"force_magnifier", 10.0, 1.0, 100.0, FeatureKind::kInteger},
         {"gravity", 9.8, 0.1, kInf},
         {"masscart", 1.0, 0.1, 10.0},
         {"masspole", 0.1, 0.01, 1.0},
         {"pole_length", 0.5, 0.05, 5.0},
         {"update_interval", 0.02, 0.002, 0.2}});
    return s;
  }

  const std::string& name() const override {
    static const std::string n = "cartpole";
    return n;
  }
  const ContextSpace& context_space() const override { return space(); }

  EnvDescriptor descriptor() const override {
    EnvDescriptor d;
    d.action_kind = EnvDescriptor::ActionKind::kDiscrete;
    d.n_actions = 2;
    d.state_dim = 4;
    d.n_cf = 6;
    d.n_cf_reward = 0;
    d.n_cf_dynamics = 6;
    return d;
  }

  void set_context(const Context& ctx) override { ctx_ = space().validate(ctx); }
  const Context& context() const override { return ctx_; }

  std::vector<double> reset(Rng& rng) override {
    state_.x = rng.uniform(-0.05, 0.05);
    state_.x_dot = rng.uniform(-0.05, 0.05);
    state_.theta = rng.uniform(-0.05, 0.05);
    state_.theta_dot = rng.uniform(-0.05, 0.05);
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const Action& action) override {
    if (done_) throw std::logic_error("step after episode end");
    const int a = discrete(action);
    if (a != 0 && a != 1) throw std::invalid_argument("cartpole: action in {0,1}");

    const double force_mag = ctx_.get("force_magnifier");
    const double gravity = ctx_.get("gravity");
    const double masscart = ctx_.get("masscart");
    const double masspole = ctx_.get("masspole");
    const double length = ctx_.get("pole_length");
    const double dt = ctx_.get("update_interval");
    const double total_mass = masscart + masspole;
    const double polemass_length = masspole * length;

    const double force = (a == 1) ? force_mag : -force_mag;
    const double cos_th = std::cos(state_.theta);
    const double sin_th = std::sin(state_.theta);

    const double temp =
        (force + polemass_length * state_.theta_dot * state_.theta_dot * sin_th) /
        total_mass;
    const double theta_acc =
        (gravity * sin_th - cos_th * temp) /
        (length * (4.0 / 3.0 - masspole * cos_th * cos_th / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_th / total_mass;

    // semi-implicit Euler: velocities first, positions with new velocities
    state_.x_dot += dt * x_acc;
    state_.x += dt * state_.x_dot;
    state_.theta_dot += dt * theta_acc;
    state_.theta += dt * state_.theta_dot;

    if (!std::isfinite(state_.x) || !std::isfinite(state_.theta))
      throw std::runtime_error("cartpole: non-finite state");

    ++steps_;
    StepResult r;
    r.observation = observe();
    r.reward = 1.0;
    r.terminated = std::abs(state_.x) > kXThreshold ||
                   std::abs(state_.theta) > kThetaThreshold;
    r.truncated = !r.terminated && steps_ >= kHorizon;
    done_ = r.done();
    return r;
  }

  const CartPoleState& state() const { return state_; }
  void set_state(const CartPoleState& s) {
    state_ = s;
    done_ = false;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> observe() const {
    return {state_.x, state_.x_dot, state_.theta, state_.theta_dot};
  }

  Context ctx_;
  CartPoleState state_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace crl
