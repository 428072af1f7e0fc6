#pragma once

// Contextual acrobot swing-up. Canonical two-link underactuated dynamics,
// integrated with one fixed-step RK4 over 0.2 s per action. Torque on the
// second joint in {-1, 0, +1}.

#include <array>
#include <cmath>
#include <stdexcept>

#include "crl/env.hpp"
#include "crl/envs/pendulum.hpp"  // wrap_angle

namespace crl {

struct AcrobotState {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta1_dot = 0.0;
  double theta2_dot = 0.0;
};

class AcrobotEnv final : public Env {
 public:
  static constexpr int kHorizon = 500;
  static constexpr double kDt = 0.2;
  static constexpr double kGravity = 9.8;

  AcrobotEnv() : ctx_(space().default_context()) {}

  static const ContextSpace& space() {
    static const ContextSpace s(
        "acrobot",
        {{"link_com_1", 0.5, 0.0, 1.0},
         {"link_com_2", 0.5, 0.0, 1.0},
         {"link_length_1", 1.0, 0.1, 10.0},
         {"link_length_2", 1.0, 0.1, 10.0},
         {"link_mass_1", 1.0, 0.1, 10.0},
         {"link_mass_2", 1.0, 0.1, 10.0},
         {"link_moi", 1.0, 0.1, 10.0},
         {"max_velocity_1", 4.0 * M_PI, 1.26, 125.66},
         {"max_velocity_2", 9.0 * M_PI, 2.83, 282.74}});
    return s;
  }

  const std::string& name() const override {
    static const std::string n = "acrobot";
    return n;
  }
  const ContextSpace& context_space() const override { return space(); }

  EnvDescriptor descriptor() const override {
    EnvDescriptor d;
    d.action_kind = EnvDescriptor::ActionKind::kDiscrete;
    d.n_actions = 3;
    d.state_dim = 6;
    d.n_cf = 9;
    d.n_cf_reward = 0;
    d.n_cf_dynamics = 9;
    return d;
  }

  void set_context(const Context& ctx) override { ctx_ = space().validate(ctx); }
  const Context& context() const override { return ctx_; }

  std::vector<double> reset(Rng& rng) override {
    state_.theta1 = rng.uniform(-0.1, 0.1);
    state_.theta2 = rng.uniform(-0.1, 0.1);
    state_.theta1_dot = rng.uniform(-0.1, 0.1);
    state_.theta2_dot = rng.uniform(-0.1, 0.1);
    steps_ = 0;
    done_ = false;
    return observe();
  }

  StepResult step(const Action& action) override {
    if (done_) throw std::logic_error("step after episode end");
    const int a = discrete(action);
    if (a < 0 || a > 2) throw std::invalid_argument("acrobot: action in {0,1,2}");
    const double torque = a - 1;

    std::array<double, 4> y = {state_.theta1, state_.theta2, state_.theta1_dot,
                               state_.theta2_dot};
    y = rk4_step(y, torque, kDt);

    state_.theta1 = wrap_angle(y[0]);
    state_.theta2 = wrap_angle(y[1]);
    state_.theta1_dot = std::clamp(y[2], -ctx_.get("max_velocity_1"),
                                   ctx_.get("max_velocity_1"));
    state_.theta2_dot = std::clamp(y[3], -ctx_.get("max_velocity_2"),
                                   ctx_.get("max_velocity_2"));

    if (!std::isfinite(state_.theta1) || !std::isfinite(state_.theta2_dot))
      throw std::runtime_error("acrobot: non-finite state");

    ++steps_;
    const bool terminated =
        -std::cos(state_.theta1) - std::cos(state_.theta2 + state_.theta1) > 1.0;
    StepResult r;
    r.observation = observe();
    r.reward = terminated ? 0.0 : -1.0;
    r.terminated = terminated;
    r.truncated = !terminated && steps_ >= kHorizon;
    done_ = r.done();
    return r;
  }

  std::array<double, 4> derivatives(const std::array<double, 4>& y,
                                    double torque) const {
    const double m1 = ctx_.get("link_mass_1"), m2 = ctx_.get("link_mass_2");
    const double l1 = ctx_.get("link_length_1");
    const double lc1 = ctx_.get("link_com_1") * l1;
    const double lc2 = ctx_.get("link_com_2") * ctx_.get("link_length_2");
    const double moi = ctx_.get("link_moi");
    const double g = kGravity;

    const double th1 = y[0], th2 = y[1], dth1 = y[2], dth2 = y[3];
    const double d1 = m1 * lc1 * lc1 +
                      m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(th2)) +
                      2.0 * moi;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(th2)) + moi;
    const double phi2 = m2 * lc2 * g * std::cos(th1 + th2 - M_PI / 2.0);
    const double phi1 = -m2 * l1 * lc2 * dth2 * dth2 * std::sin(th2) -
                        2.0 * m2 * l1 * lc2 * dth2 * dth1 * std::sin(th2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(th1 - M_PI / 2.0) +
                        phi2;
    const double ddth2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dth1 * dth1 * std::sin(th2) -
         phi2) /
        (m2 * lc2 * lc2 + moi - d2 * d2 / d1);
    const double ddth1 = -(d2 * ddth2 + phi1) / d1;
    return {dth1, dth2, ddth1, ddth2};
  }

  const AcrobotState& state() const { return state_; }
  void set_state(const AcrobotState& s) {
    state_ = s;
    done_ = false;
  }

 private:
  std::array<double, 4> rk4_step(const std::array<double, 4>& y, double torque,
                                 double dt) const {
    auto add = [](const std::array<double, 4>& a, const std::array<double, 4>& b,
                  double scale) {
      std::array<double, 4> out;
      for (int i = 0; i < 4; ++i) out[i] = a[i] + scale * b[i];
      return out;
    };
    const auto k1 = derivatives(y, torque);
    const auto k2 = derivatives(add(y, k1, dt / 2.0), torque);
    const auto k3 = derivatives(add(y, k2, dt / 2.0), torque);
    const auto k4 = derivatives(add(y, k3, dt), torque);
    std::array<double, 4> out;
    for (int i = 0; i < 4; ++i)
      out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
  }

  std::vector<double> observe() const {
    return {std::cos(state_.theta1), std::sin(state_.theta1),
            std::cos(state_.theta2), std::sin(state_.theta2),
            state_.theta1_dot,       state_.theta2_dot};
  }

  Context ctx_;
  AcrobotState state_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace crl
