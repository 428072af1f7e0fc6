#include <catch2/catch_amalgamated.hpp>

#include "crl/context.hpp"
#include "crl/envs/pendulum.hpp"

using namespace crl;

TEST_CASE("in-bounds pendulum context passes validation unchanged") {
  const ContextSpace& space = PendulumEnv::space();
  Context ctx;
  ctx.set("g", 10.0);
  ctx.set("l", 1.0);
  ctx.set("m", 1.0);
  ctx.set("dt", 0.05);
  ctx.set("max_speed", 8.0);
  ValidationReport rep;
  Context out = space.validate(ctx, &rep);
  REQUIRE(out == ctx);
  REQUIRE(rep.clipped.empty());
  REQUIRE(rep.defaulted.empty());
}

TEST_CASE("out-of-bounds value is clipped to the bound") {
  const ContextSpace& space = PendulumEnv::space();
  Context ctx;
  ctx.set("l", -3.0);
  ValidationReport rep;
  Context out = space.validate(ctx, &rep);
  REQUIRE(out.get("l") == 1e-6);
  REQUIRE(rep.clipped == std::vector<std::string>{"l"});
}

TEST_CASE("empty context fills all defaults") {
  const ContextSpace& space = PendulumEnv::space();
  Context out = space.validate(Context{});
  REQUIRE(out == space.default_context());
}

TEST_CASE("unknown feature is a hard error") {
  const ContextSpace& space = PendulumEnv::space();
  Context ctx;
  ctx.set("no_such_feature", 1.0);
  REQUIRE_THROWS_AS(space.validate(ctx), std::invalid_argument);
}

TEST_CASE("integer features round to integral values") {
  ContextSpace space("t", {{"n", 3.0, 1.0, 10.0, FeatureKind::kInteger}});
  Context ctx;
  ctx.set("n", 4.4);
  REQUIRE(space.validate(ctx).get("n") == 4.0);
}

TEST_CASE("categorical default must be a valid category") {
  REQUIRE_THROWS_AS(
      FeatureSpec("c", 3.0, 0.0, 3.0, FeatureKind::kCategorical, 3),
      std::invalid_argument);
  FeatureSpec ok("c", 2.0, 0.0, 2.0, FeatureKind::kCategorical, 3);
  REQUIRE(ok.n_categories == 3);
}

TEST_CASE("duplicate feature names are rejected") {
  REQUIRE_THROWS_AS(ContextSpace("t", {{"a", 0, -1, 1}, {"a", 0, -1, 1}}),
                    std::invalid_argument);
}

TEST_CASE("vectorize follows table order dt,g,l,m,max_speed") {
  const ContextSpace& space = PendulumEnv::space();
  auto v = space.vectorize(space.default_context());
  REQUIRE(v == std::vector<double>{0.05, 10.0, 1.0, 1.0, 8.0});
}

TEST_CASE("vectorize subset projects") {
  const ContextSpace& space = PendulumEnv::space();
  std::vector<std::string> subset = {"g"};
  auto v = space.vectorize(space.default_context(), &subset);
  REQUIRE(v == std::vector<double>{10.0});
}

TEST_CASE("normalized default vector is all ones for nonzero defaults") {
  const ContextSpace& space = PendulumEnv::space();
  auto v = space.vectorize(space.default_context(), nullptr, true);
  for (double x : v) REQUIRE(x == 1.0);
}
