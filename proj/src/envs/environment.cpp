#include "ccge/envs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccge/common/errors.hpp"
#include "ccge/envs/classic.hpp"
#include "ccge/envs/pointmass.hpp"

namespace ccge::envs {

EnvState Environment::reset(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    0x5eedu};
  episode_rng_.seed(seq);
  state_ = EnvState{};
  state_.observation = reset_impl(episode_rng_);
  started_ = true;
  return state_;
}

StepResult Environment::step(std::span<const double> action) {
  if (!started_) throw std::logic_error("Environment::step before reset");
  if (state_.terminated || state_.truncated) {
    throw std::logic_error("Environment::step on a finished episode");
  }
  const EnvSpec s = spec();
  std::vector<double> bounded(action.begin(), action.end());
  if (s.discrete()) {
    if (bounded.size() != 1) throw ShapeError("Environment::step: discrete envs take one action index");
    const double max_index = static_cast<double>(s.action_count - 1);
    if (!std::isfinite(bounded[0]) || bounded[0] < 0.0 || bounded[0] > max_index) {
      bounded[0] = std::isfinite(bounded[0]) ? std::clamp(bounded[0], 0.0, max_index) : 0.0;
      ++clamped_actions_;
    }
    bounded[0] = std::round(bounded[0]);
  } else {
    if (static_cast<int>(bounded.size()) != s.action_dim) {
      throw ShapeError("Environment::step: expected " + std::to_string(s.action_dim) + " action components, got " +
                       std::to_string(bounded.size()));
    }
    bool clamped = false;
    for (double& a : bounded) {
      if (!std::isfinite(a)) {
        a = 0.0;
        clamped = true;
      } else if (a < -1.0 || a > 1.0) {
        a = std::clamp(a, -1.0, 1.0);
        clamped = true;
      }
    }
    if (clamped) ++clamped_actions_;
  }
  bool terminated = false;
  const double reward = step_impl(bounded, terminated);
  ++state_.step_index;
  state_.observation = observe();
  state_.terminated = terminated;
  state_.truncated = !terminated && state_.step_index >= s.horizon;
  return StepResult{state_.observation, reward, state_.terminated, state_.truncated};
}

StepResult Environment::step_discrete(int action) {
  const double a = static_cast<double>(action);
  return step(std::span<const double>(&a, 1));
}

std::unique_ptr<Environment> make_env(std::string_view id) {
  if (id == "cartpole") return std::make_unique<CartPole>();
  if (id == "mountaincar") return std::make_unique<MountainCar>();
  if (id == "pendulum") return std::make_unique<Pendulum>();
  if (id == "pointmass-dense") return std::make_unique<PointMass>(false);
  if (id == "pointmass-sparse") return std::make_unique<PointMass>(true);
  throw ConfigError("unknown environment id '" + std::string(id) + "'");
}

std::vector<std::string> env_ids() {
  return {"cartpole", "mountaincar", "pendulum", "pointmass-dense", "pointmass-sparse"};
}

}  // namespace ccge::envs
