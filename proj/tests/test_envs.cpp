#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "crl/envs/registry.hpp"
#include "oracles.hpp"

using namespace crl;
using Catch::Approx;

namespace {

Context pendulum_ctx(double dt, double g, double l, double m, double ms) {
  Context c;
  c.set("dt", dt);
  c.set("g", g);
  c.set("l", l);
  c.set("m", m);
  c.set("max_speed", ms);
  return c;
}

}  // namespace

TEST_CASE("pendulum upright equilibrium is a fixed point") {
  // sin(theta + pi) at theta = 0 is sin(pi) ~ 1.2e-16, not exactly zero, so
  // the fixed point holds to rounding error only
  PendulumEnv env;
  env.set_state({0.0, 0.0});
  StepResult r = env.step(Action(std::vector<double>{0.0}));
  REQUIRE(env.state().theta == Approx(0.0).margin(1e-15));
  REQUIRE(env.state().theta_dot == Approx(0.0).margin(1e-14));
  REQUIRE(r.observation[0] == Approx(1.0).margin(1e-15));
}

TEST_CASE("pendulum hand-evaluated step from theta=pi/2") {
  PendulumEnv env;
  env.set_state({M_PI / 2.0, 0.0});
  env.step(Action(std::vector<double>{0.0}));
  REQUIRE(env.state().theta_dot == Approx(0.75).margin(1e-12));
  REQUIRE(env.state().theta == Approx(M_PI / 2.0 + 0.0375).margin(1e-12));
}

TEST_CASE("doubling l halves the pendulum gravity term") {
  PendulumEnv env;
  env.set_context(pendulum_ctx(0.05, 10, 2, 1, 8));
  env.set_state({M_PI / 2.0, 0.0});
  env.step(Action(std::vector<double>{0.0}));
  REQUIRE(env.state().theta_dot == Approx(0.375).margin(1e-12));
}

TEST_CASE("pendulum reward uses wrapped angle and torque cost") {
  PendulumEnv env;
  env.set_state({M_PI / 2.0, 1.0});
  StepResult r = env.step(Action(std::vector<double>{1.0}));
  REQUIRE(r.reward ==
          Approx(-(M_PI * M_PI / 4.0 + 0.1 * 1.0 + 0.001 * 1.0)).margin(1e-12));
}

TEST_CASE("pendulum truncates at 200 steps and never terminates") {
  PendulumEnv env;
  Rng rng(0);
  env.reset(rng);
  for (int i = 0; i < 199; ++i) {
    StepResult r = env.step(Action(std::vector<double>{0.0}));
    REQUIRE_FALSE(r.done());
  }
  StepResult last = env.step(Action(std::vector<double>{0.0}));
  REQUIRE(last.truncated);
  REQUIRE_FALSE(last.terminated);
}

TEST_CASE("pendulum oracle probes") {
  PendulumEnv env;
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    oracle::PendulumCtx oc{rng.uniform(0.01, 0.1), rng.uniform(1, 20),
                           rng.uniform(0.2, 3), rng.uniform(0.2, 3),
                           rng.uniform(4, 12)};
    env.set_context(pendulum_ctx(oc.dt, oc.g, oc.l, oc.m, oc.max_speed));
    double th = rng.uniform(-M_PI, M_PI), thdot = rng.uniform(-8, 8);
    double u = rng.uniform(-3, 3);
    env.set_state({th, thdot});
    env.step(Action(std::vector<double>{u}));
    double oth = th, othdot = thdot;
    oracle::pendulum_step(oth, othdot, u, oc);
    REQUIRE(env.state().theta == Approx(oth).epsilon(1e-10).margin(1e-12));
    REQUIRE(env.state().theta_dot == Approx(othdot).epsilon(1e-10).margin(1e-12));
  }
}

TEST_CASE("cartpole hand-evaluated step from rest, action right") {
  CartPoleEnv env;
  env.set_state({0, 0, 0, 0});
  env.step(Action(1));
  REQUIRE(env.state().x_dot == Approx(0.1951219512195122).margin(1e-9));
  REQUIRE(env.state().x == Approx(0.003902439024390244).margin(1e-10));
  REQUIRE(env.state().theta_dot == Approx(-0.2926829268292683).margin(1e-9));
  REQUIRE(env.state().theta == Approx(-0.005853658536585366).margin(1e-10));
}

TEST_CASE("cartpole symmetric alternating forces stay bounded") {
  CartPoleEnv env;
  env.set_state({0, 0, 0, 0});
  for (int i = 0; i < 20; ++i) {
    StepResult r = env.step(Action(i % 2));
    if (r.done()) break;
  }
  REQUIRE(std::abs(env.state().x) < 0.05);
}

TEST_CASE("cartpole massless-pole limit stays finite") {
  CartPoleEnv env;
  Context c;
  c.set("masspole", 0.01);
  env.set_context(c);
  env.set_state({0, 0, 0.1, 0});
  StepResult r = env.step(Action(0));
  for (double v : r.observation) REQUIRE(std::isfinite(v));
}

TEST_CASE("cartpole terminates on angle threshold") {
  CartPoleEnv env;
  env.set_state({0, 0, 12.5 * 2 * M_PI / 360.0, 0});
  StepResult r = env.step(Action(1));
  REQUIRE(r.terminated);
  REQUIRE(r.reward == 1.0);
}

TEST_CASE("cartpole oracle probes") {
  CartPoleEnv env;
  Rng rng(202);
  for (int i = 0; i < 1000; ++i) {
    oracle::CartPoleCtx oc{std::round(rng.uniform(1, 30)), rng.uniform(1, 20),
                           rng.uniform(0.1, 5), rng.uniform(0.01, 1),
                           rng.uniform(0.05, 2), rng.uniform(0.002, 0.1)};
    Context c;
    c.set("force_magnifier", oc.force_mag);
    c.set("gravity", oc.gravity);
    c.set("masscart", oc.masscart);
    c.set("masspole", oc.masspole);
    c.set("pole_length", oc.length);
    c.set("update_interval", oc.dt);
    env.set_context(c);
    double x = rng.uniform(-2, 2), xd = rng.uniform(-3, 3);
    double th = rng.uniform(-0.2, 0.2), thd = rng.uniform(-3, 3);
    int a = static_cast<int>(rng.uniform_int(2));
    env.set_state({x, xd, th, thd});
    env.step(Action(a));
    oracle::cartpole_step(x, xd, th, thd, a, oc);
    REQUIRE(env.state().x == Approx(x).epsilon(1e-10).margin(1e-12));
    REQUIRE(env.state().x_dot == Approx(xd).epsilon(1e-10).margin(1e-12));
    REQUIRE(env.state().theta == Approx(th).epsilon(1e-10).margin(1e-12));
    REQUIRE(env.state().theta_dot == Approx(thd).epsilon(1e-10).margin(1e-12));
  }
}

TEST_CASE("mountaincar push_left at valley bottom starts moving left") {
  MountainCarEnv env;
  env.set_state({-M_PI / 6.0, 0.0});
  env.step(Action(0));
  REQUIRE(env.state().velocity == Approx(-0.001).margin(1e-12));
}

TEST_CASE("mountaincar velocity clamps at max_speed") {
  MountainCarEnv env;
  env.set_state({-0.5, 0.07});
  env.step(Action(2));
  REQUIRE(env.state().velocity <= 0.07);
}

TEST_CASE("mountaincar deterministic reset with zero stds") {
  MountainCarEnv env;
  Context c;
  c.set("start_position_std", 0.0);
  env.set_context(c);
  Rng rng(1);
  auto obs = env.reset(rng);
  REQUIRE(obs[0] == -0.5);
}

TEST_CASE("mountaincar terminates at the goal") {
  MountainCarEnv env;
  env.set_state({0.49, 0.07});
  StepResult r = env.step(Action(2));
  REQUIRE(r.terminated);
  REQUIRE(r.reward == -1.0);
}

TEST_CASE("mountaincar oracle probes") {
  MountainCarEnv env;
  Rng rng(303);
  for (int i = 0; i < 1000; ++i) {
    oracle::MountainCarCtx oc{rng.uniform(0.0005, 0.002),
                              rng.uniform(0.001, 0.005),
                              rng.uniform(0.05, 0.1), -1.2, 0.6};
    Context c;
    c.set("force", oc.force);
    c.set("gravity", oc.gravity);
    c.set("max_speed", oc.max_speed);
    env.set_context(c);
    double p = rng.uniform(-1.2, 0.6), v = rng.uniform(-0.07, 0.07);
    int a = static_cast<int>(rng.uniform_int(3));
    env.set_state({p, v});
    env.step(Action(a));
    oracle::mountaincar_step(p, v, a, oc);
    REQUIRE(env.state().position == Approx(p).epsilon(1e-10).margin(1e-14));
    REQUIRE(env.state().velocity == Approx(v).epsilon(1e-10).margin(1e-14));
  }
}

TEST_CASE("acrobot hanging rest stays at rest") {
  AcrobotEnv env;
  env.set_state({0, 0, 0, 0});
  env.step(Action(1));
  REQUIRE(env.state().theta1 == Approx(0.0).margin(1e-14));
  REQUIRE(env.state().theta2 == Approx(0.0).margin(1e-14));
  REQUIRE(env.state().theta1_dot == Approx(0.0).margin(1e-14));
}

TEST_CASE("acrobot default velocity caps are 4pi and 9pi") {
  const ContextSpace& space = AcrobotEnv::space();
  REQUIRE(space.spec("max_velocity_1").default_value == 4.0 * M_PI);
  REQUIRE(space.spec("max_velocity_2").default_value == 9.0 * M_PI);
  REQUIRE(std::abs(4.0 * M_PI - 12.57) < 0.005);
  REQUIRE(std::abs(9.0 * M_PI - 28.27) < 0.005);
}

TEST_CASE("acrobot clamps injected velocities") {
  AcrobotEnv env;
  env.set_state({0, 0, 100.0, -100.0});
  env.step(Action(1));
  REQUIRE(std::abs(env.state().theta1_dot) <= 4.0 * M_PI);
  REQUIRE(std::abs(env.state().theta2_dot) <= 9.0 * M_PI);
}

TEST_CASE("acrobot oracle probes") {
  AcrobotEnv env;
  Rng rng(404);
  for (int i = 0; i < 1000; ++i) {
    oracle::AcrobotCtx oc{rng.uniform(0.5, 2),  rng.uniform(0.5, 2),
                          rng.uniform(0.5, 2),  rng.uniform(0.5, 2),
                          rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                          rng.uniform(0.5, 2),  4.0 * M_PI, 9.0 * M_PI};
    Context c;
    c.set("link_mass_1", oc.m1);
    c.set("link_mass_2", oc.m2);
    c.set("link_length_1", oc.l1);
    c.set("link_length_2", oc.l2);
    c.set("link_com_1", oc.com1);
    c.set("link_com_2", oc.com2);
    c.set("link_moi", oc.moi);
    env.set_context(c);
    std::array<double, 4> y = {rng.uniform(-M_PI, M_PI), rng.uniform(-M_PI, M_PI),
                               rng.uniform(-10, 10), rng.uniform(-20, 20)};
    int a = static_cast<int>(rng.uniform_int(3));
    env.set_state({y[0], y[1], y[2], y[3]});
    env.step(Action(a));
    auto o = oracle::acrobot_step(y, a, oc);
    REQUIRE(env.state().theta1 == Approx(o[0]).epsilon(1e-10).margin(1e-10));
    REQUIRE(env.state().theta2 == Approx(o[1]).epsilon(1e-10).margin(1e-10));
    REQUIRE(env.state().theta1_dot == Approx(o[2]).epsilon(1e-10).margin(1e-10));
    REQUIRE(env.state().theta2_dot == Approx(o[3]).epsilon(1e-10).margin(1e-10));
  }
}

TEST_CASE("describe reports table-derived shapes") {
  EnvDescriptor p = describe("pendulum");
  REQUIRE(p.action_kind == EnvDescriptor::ActionKind::kContinuous);
  REQUIRE(p.action_dim == 1);
  REQUIRE(p.state_dim == 3);
  REQUIRE(p.n_cf == 5);

  EnvDescriptor cp = describe("cartpole");
  REQUIRE(cp.action_kind == EnvDescriptor::ActionKind::kDiscrete);
  REQUIRE(cp.n_actions == 2);
  REQUIRE(cp.state_dim == 4);
  REQUIRE(cp.n_cf == 6);

  EnvDescriptor mc = describe("mountaincar");
  REQUIRE(mc.n_actions == 3);
  REQUIRE(mc.state_dim == 2);
  REQUIRE(mc.n_cf == 11);
  REQUIRE(mc.n_cf_reward == 2);
  REQUIRE(mc.n_cf_dynamics == 9);

  REQUIRE(describe("acrobot").n_cf == 9);
  REQUIRE(describe("lander").n_cf == 16);
  REQUIRE_THROWS_AS(describe("nonexistent"), std::invalid_argument);
}

TEST_CASE("fixed seed and actions give identical trajectories") {
  for (const auto& name : env_names()) {
    auto a = make_env(name);
    auto b = make_env(name);
    Rng ra(77), rb(77);
    auto oa = a->reset(ra);
    auto ob = b->reset(rb);
    REQUIRE(oa == ob);
    Rng act_rng(5);
    for (int i = 0; i < 50; ++i) {
      Action act;
      if (a->descriptor().action_kind == EnvDescriptor::ActionKind::kDiscrete)
        act = Action(static_cast<int>(act_rng.uniform_int(a->descriptor().n_actions)));
      else
        act = Action(std::vector<double>{act_rng.uniform(-2, 2)});
      StepResult sa = a->step(act);
      StepResult sb = b->step(act);
      REQUIRE(sa.observation == sb.observation);
      REQUIRE(sa.reward == sb.reward);
      if (sa.done()) break;
    }
  }
}
