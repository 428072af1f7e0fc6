#pragma once

// Simplified planar lander: a rigid body (point mass + rotational inertia)
// with a main engine and two side engines, flat terrain with a centered
// landing pad, analytic leg-contact tests. Discrete actions
// {noop, fire_left, fire_main, fire_right}. Gravity, engine powers and the
// initial-impulse scale come from the context; the remaining features of the
// context table are accepted but inert.
//
// Reward is potential-based shaping on (distance to pad, speed, tilt) plus
// fuel costs and a terminal bonus: +100 for a gentle landing, -penalty for a
// crash. The crash penalty is configurable (training 100, transfer testing
// 10000).

#include <cmath>
#include <stdexcept>

#include "crl/env.hpp"

namespace crl {

struct LanderState {
  double x = 0.0, y = 0.0;       // meters; pad center at origin
  double vx = 0.0, vy = 0.0;     // m/s
  double theta = 0.0;            // radians, 0 = upright
  double omega = 0.0;            // rad/s
  bool left_contact = false, right_contact = false;
  double fuel_used = 0.0;        // accumulated engine impulse
};

enum class LanderOutcome { kNone, kLanded, kCrashed, kOutOfBounds, kTimeout };

class LanderEnv final : public Env {
 public:
  static constexpr int kHorizon = 1000;
  static constexpr double kDt = 0.02;        // 1 / FPS at default FPS 50
  static constexpr double kWorldHalfWidth = 5.0;
  static constexpr double kWorldCeiling = 6.0;
  static constexpr double kSpawnAltitude = 4.0;
  static constexpr double kPadHalfWidth = 1.0;
  static constexpr double kLegDx = 0.25;     // body frame leg offsets
  static constexpr double kLegDy = 0.30;
  static constexpr double kBodyClearance = 0.15;
  static constexpr double kMaxLandVy = 1.0;  // gentle-touchdown thresholds
  static constexpr double kMaxLandVx = 1.0;
  static constexpr double kMaxLandTilt = 0.4;
  static constexpr double kSideTorque = 2.0;  // rad/s^2 per unit engine power
  static constexpr double kImpulseScale = 1e-3;  // velocity per INITIAL_RANDOM
  static constexpr double kSpinScale = 2e-4;
  static constexpr double kMainFuelCost = 0.30;
  static constexpr double kSideFuelCost = 0.03;

  LanderEnv() : ctx_(space().default_context()) {}

  static const ContextSpace& space() {
    static const ContextSpace s(
        "lander",
        {{"FPS", 50.0, 1.0, 500.0},
         {"GRAVITY_X", 0.0, -20.0, 20.0},
         {"GRAVITY_Y", -10.0, -20.0, -0.01},
         {"INITIAL_RANDOM", 1000.0, 0.0, 2000.0},
         {"LEG_AWAY", 20.0, 0.0, 50.0},
         {"LEG_DOWN", 18.0, 0.0, 50.0},
         {"LEG_H", 8.0, 1.0, 20.0},
         {"LEG_SPRING_TORQUE", 40.0, 0.0, 100.0},
         {"LEG_W", 2.0, 1.0, 10.0},
         {"MAIN_ENGINE_POWER", 13.0, 0.0, 50.0},
         {"SCALE", 30.0, 1.0, 100.0},
         {"SIDE_ENGINE_AWAY", 12.0, 1.0, 20.0},
         {"SIDE_ENGINE_HEIGHT", 14.0, 1.0, 20.0},
         {"SIDE_ENGINE_POWER", 0.6, 0.0, 50.0},
         {"VIEWPORT_H", 400.0, 200.0, 800.0, FeatureKind::kInteger},
         {"VIEWPORT_W", 600.0, 400.0, 1000.0, FeatureKind::kInteger}},
        /*inert=*/{"FPS", "LEG_AWAY", "LEG_DOWN", "LEG_H", "LEG_SPRING_TORQUE",
                   "LEG_W", "SCALE", "SIDE_ENGINE_AWAY", "SIDE_ENGINE_HEIGHT",
                   "VIEWPORT_H", "VIEWPORT_W"});
    return s;
  }

  const std::string& name() const override {
    static const std::string n = "lander";
    return n;
  }
  const ContextSpace& context_space() const override { return space(); }

  EnvDescriptor descriptor() const override {
    EnvDescriptor d;
    d.action_kind = EnvDescriptor::ActionKind::kDiscrete;
    d.n_actions = 4;
    d.state_dim = 8;
    d.n_cf = 16;
    d.n_cf_reward = 0;
    d.n_cf_dynamics = 16;
    return d;
  }

  void set_context(const Context& ctx) override { ctx_ = space().validate(ctx); }
  const Context& context() const override { return ctx_; }

  // Takes effect from the next reset onward.
  void set_game_over_penalty(double penalty) {
    if (penalty <= 0) throw std::invalid_argument("penalty must be > 0");
    pending_penalty_ = penalty;
  }
  double game_over_penalty() const { return penalty_; }

  std::vector<double> reset(Rng& rng) override {
    penalty_ = pending_penalty_;
    const double ir = ctx_.get("INITIAL_RANDOM");
    state_ = LanderState{};
    state_.x = 0.0;
    state_.y = kSpawnAltitude;
    state_.vx = rng.uniform(-1.0, 1.0) * ir * kImpulseScale;
    state_.vy = rng.uniform(-1.0, 1.0) * ir * kImpulseScale;
    state_.omega = rng.uniform(-1.0, 1.0) * ir * kSpinScale;
    steps_ = 0;
    outcome_ = LanderOutcome::kNone;
    prev_potential_ = potential();
    return observe();
  }

  StepResult step(const Action& action) override {
    if (outcome_ != LanderOutcome::kNone)
      throw std::logic_error("step after episode end");
    const int a = discrete(action);
    if (a < 0 || a > 3) throw std::invalid_argument("lander: action in {0..3}");

    const double gx = ctx_.get("GRAVITY_X"), gy = ctx_.get("GRAVITY_Y");
    const double main_power = ctx_.get("MAIN_ENGINE_POWER");
    const double side_power = ctx_.get("SIDE_ENGINE_POWER");

    // body axes: up = (-sin th, cos th), right = (cos th, sin th)
    const double up_x = -std::sin(state_.theta), up_y = std::cos(state_.theta);
    const double rt_x = std::cos(state_.theta), rt_y = std::sin(state_.theta);

    double ax = gx, ay = gy, alpha = 0.0, fuel = 0.0;
    if (a == 2) {  // main engine
      ax += main_power * up_x;
      ay += main_power * up_y;
      fuel = kMainFuelCost;
    } else if (a == 1) {  // left engine: push right, rotate counterclockwise
      ax += side_power * rt_x;
      ay += side_power * rt_y;
      alpha += side_power * kSideTorque;
      fuel = kSideFuelCost;
    } else if (a == 3) {  // right engine: mirror of left
      ax -= side_power * rt_x;
      ay -= side_power * rt_y;
      alpha -= side_power * kSideTorque;
      fuel = kSideFuelCost;
    }
    state_.fuel_used += fuel;

    // semi-implicit Euler
    state_.vx += ax * kDt;
    state_.vy += ay * kDt;
    state_.x += state_.vx * kDt;
    state_.y += state_.vy * kDt;
    state_.omega += alpha * kDt;
    state_.theta += state_.omega * kDt;

    if (!std::isfinite(state_.x) || !std::isfinite(state_.vy) ||
        !std::isfinite(state_.theta))
      throw std::runtime_error("lander: non-finite state");

    ++steps_;

    const double left_h = leg_height(-kLegDx);
    const double right_h = leg_height(kLegDx);
    state_.left_contact = left_h <= 0.0;
    state_.right_contact = right_h <= 0.0;

    double terminal_bonus = 0.0;
    if (state_.left_contact || state_.right_contact ||
        state_.y - kBodyClearance <= 0.0) {
      const bool gentle = std::abs(state_.vy) <= kMaxLandVy &&
                          std::abs(state_.vx) <= kMaxLandVx &&
                          std::abs(state_.theta) <= kMaxLandTilt &&
                          state_.y - kBodyClearance > 0.0;
      if (gentle) {
        outcome_ = LanderOutcome::kLanded;
        terminal_bonus = 100.0;
      } else {
        outcome_ = LanderOutcome::kCrashed;
        terminal_bonus = -penalty_;
      }
    } else if (std::abs(state_.x) > kWorldHalfWidth ||
               state_.y > kWorldCeiling) {
      outcome_ = LanderOutcome::kOutOfBounds;
      terminal_bonus = -100.0;
    } else if (steps_ >= kHorizon) {
      outcome_ = LanderOutcome::kTimeout;
    }

    const double pot = potential();
    const double reward = (pot - prev_potential_) - fuel + terminal_bonus;
    prev_potential_ = pot;

    StepResult r;
    r.observation = observe();
    r.reward = reward;
    r.terminated = outcome_ != LanderOutcome::kNone &&
                   outcome_ != LanderOutcome::kTimeout;
    r.truncated = outcome_ == LanderOutcome::kTimeout;
    r.info["crashed"] = outcome_ == LanderOutcome::kCrashed ? 1.0 : 0.0;
    r.info["landed"] = outcome_ == LanderOutcome::kLanded ? 1.0 : 0.0;
    return r;
  }

  LanderOutcome outcome() const { return outcome_; }
  const LanderState& state() const { return state_; }
  void set_state(const LanderState& s) {
    state_ = s;
    outcome_ = LanderOutcome::kNone;
    prev_potential_ = potential();
  }

 private:
  double leg_height(double leg_dx) const {
    // world height of a leg tip at body-frame (leg_dx, -kLegDy)
    return state_.y + leg_dx * std::sin(state_.theta) -
           kLegDy * std::cos(state_.theta);
  }

  double potential() const {
    const double dist = std::sqrt(state_.x * state_.x + state_.y * state_.y) /
                        kWorldHalfWidth;
    const double speed =
        std::sqrt(state_.vx * state_.vx + state_.vy * state_.vy) / 2.5;
    return -100.0 * dist - 100.0 * speed - 100.0 * std::abs(state_.theta) +
           10.0 * state_.left_contact + 10.0 * state_.right_contact;
  }

  std::vector<double> observe() const {
    return {state_.x / kWorldHalfWidth,
            state_.y / kWorldHalfWidth,
            state_.vx / 2.5,
            state_.vy / 2.5,
            state_.theta,
            state_.omega / 2.0,
            state_.left_contact ? 1.0 : 0.0,
            state_.right_contact ? 1.0 : 0.0};
  }

  Context ctx_;
  LanderState state_;
  LanderOutcome outcome_ = LanderOutcome::kNone;
  double penalty_ = 100.0;
  double pending_penalty_ = 100.0;
  double prev_potential_ = 0.0;
  int steps_ = 0;
};

}  // namespace crl
