#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "crl/envs/acrobot.hpp"
#include "crl/envs/cartpole.hpp"
#include "crl/envs/lander.hpp"
#include "crl/envs/mountain_car.hpp"
#include "crl/envs/pendulum.hpp"

namespace crl {

inline const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names = {
      "pendulum", "cartpole", "mountaincar", "acrobot", "lander"};
  return names;
}

inline std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "cartpole") return std::make_unique<CartPoleEnv>();
  if (name == "mountaincar") return std::make_unique<MountainCarEnv>();
  if (name == "acrobot") return std::make_unique<AcrobotEnv>();
  if (name == "lander") return std::make_unique<LanderEnv>();
  throw std::invalid_argument("unknown environment '" + name + "'");
}

inline EnvDescriptor describe(const std::string& name) {
  return make_env(name)->descriptor();
}

}  // namespace crl
