#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccge/common/rng.hpp"

namespace ccge::envs {

struct EnvSpec {
  std::string id;
  int obs_dim = 0;
  int action_dim = 0;    // continuous action components, 0 for discrete envs
  int action_count = 0;  // discrete action choices, 0 for continuous envs
  int horizon = 0;
  double reward_min = 0.0;
  double reward_max = 0.0;

  bool discrete() const { return action_count > 0; }
};

struct EnvState {
  std::vector<double> observation;
  int step_index = 0;
  bool terminated = false;
  bool truncated = false;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// Single-owner MDP. Dynamics are a pure function of the reset seed and the
// action sequence.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvSpec spec() const = 0;

  EnvState reset(std::uint64_t seed);

  // Continuous envs take one value per action component in [-1, 1]; values
  // outside are clamped and counted. Discrete envs read action[0] as the
  // index. Stepping a finished episode throws std::logic_error.
  StepResult step(std::span<const double> action);
  StepResult step_discrete(int action);

  const EnvState& state() const { return state_; }

  // Actions that needed clamping since construction.
  std::int64_t clamped_actions() const { return clamped_actions_; }

  // Environment-specific success measure of the current episode (waypoints
  // captured, goal reached, ...).
  virtual double success() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;

 protected:
  virtual std::vector<double> reset_impl(Rng& rng) = 0;
  // Returns reward; sets terminated when the MDP reaches a terminal state.
  virtual double step_impl(std::span<const double> action, bool& terminated) = 0;
  virtual std::vector<double> observe() const = 0;

  Rng episode_rng_;

 private:
  EnvState state_;
  std::int64_t clamped_actions_ = 0;
  bool started_ = false;
};

// Stable identifiers: cartpole, mountaincar, pendulum, pointmass-dense,
// pointmass-sparse.
std::unique_ptr<Environment> make_env(std::string_view id);
std::vector<std::string> env_ids();

}  // namespace ccge::envs
