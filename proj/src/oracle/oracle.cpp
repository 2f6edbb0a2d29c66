#include "ccge/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ccge/common/errors.hpp"
#include "ccge/nn/checkpoint.hpp"
#include "ccge/sac/agent.hpp"

namespace ccge::oracle {

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::kScriptedPd:
      return "scripted-pd";
    case Kind::kCheckpoint:
      return "checkpoint";
    case Kind::kBootstrap:
      return "bootstrap";
  }
  return "unknown";
}

std::vector<double> pd_waypoint_action(std::span<const double> obs, const PdGains& gains) {
  if (obs.size() != 8) throw ShapeError("pd_waypoint_action: expected the 8-value waypoint observation");
  std::vector<double> action(2);
  for (std::size_t i = 0; i < 2; ++i) {
    action[i] = std::clamp(gains.kp * obs[4 + i] - gains.kd * obs[2 + i], -1.0, 1.0);
  }
  return action;
}

std::vector<double> pendulum_swing_action(std::span<const double> obs) {
  if (obs.size() != 3) throw ShapeError("pendulum_swing_action: expected (cos, sin, theta_dot)");
  const double theta = std::atan2(obs[1], obs[0]);
  const double theta_dot = obs[2];
  double torque = 0.0;
  if (obs[0] > 0.9) {
    torque = -10.0 * theta - 1.5 * theta_dot;
  } else {
    // Pump energy toward the upright level (m = l = 1, g = 10).
    const double energy = 0.5 * theta_dot * theta_dot + 10.0 * (std::cos(theta) - 1.0);
    torque = -std::copysign(2.0, theta_dot * energy);
    if (theta_dot == 0.0) torque = 2.0;
  }
  return {std::clamp(torque / 2.0, -1.0, 1.0)};
}

OraclePolicy OraclePolicy::scripted(std::string_view env_id, bool bootstrappable) {
  if (env_id == "pointmass-sparse" || env_id == "pointmass-dense") {
    return scripted([](std::span<const double> o) { return pd_waypoint_action(o); }, 8, 2, bootstrappable);
  }
  if (env_id == "pendulum") return scripted(pendulum_swing_action, 3, 1, bootstrappable);
  throw ConfigError("no scripted oracle for environment '" + std::string(env_id) + "'");
}

OraclePolicy OraclePolicy::scripted(Controller controller, int obs_dim, int action_dim, bool bootstrappable) {
  OraclePolicy o;
  o.kind_ = Kind::kScriptedPd;
  o.bootstrappable_ = bootstrappable;
  o.obs_dim_ = obs_dim;
  o.action_dim_ = action_dim;
  o.controller_ = std::move(controller);
  return o;
}

OraclePolicy OraclePolicy::from_actor(sac::GaussianActor<float> actor, bool bootstrappable) {
  OraclePolicy o;
  o.kind_ = bootstrappable ? Kind::kBootstrap : Kind::kCheckpoint;
  o.bootstrappable_ = bootstrappable;
  o.obs_dim_ = actor.obs_dim();
  o.action_dim_ = actor.action_dim();
  o.actor_ = std::move(actor);
  o.has_actor_ = true;
  return o;
}

OraclePolicy OraclePolicy::from_checkpoint(const std::string& path, bool bootstrappable) {
  const nn::Checkpoint ckpt = nn::checkpoint_load(path);
  const auto it = ckpt.networks.find("actor");
  if (it == ckpt.networks.end()) throw CheckpointFormatError("checkpoint has no 'actor' network: " + path);
  const int out = it->second.output_size();
  if (out % 2 != 0) throw CheckpointShapeError("actor output size must be even: " + path);
  return from_actor(sac::GaussianActor<float>(it->second, out / 2), bootstrappable);
}

std::vector<double> OraclePolicy::act(std::span<const double> observation) const {
  if (static_cast<int>(observation.size()) != obs_dim_) {
    throw ShapeError("oracle: observation has " + std::to_string(observation.size()) + " values, expected " +
                     std::to_string(obs_dim_));
  }
  if (!has_actor_) return controller_(observation);
  const MatrixF mean = actor_.mean_action(sac::to_row(observation));
  std::vector<double> out(static_cast<std::size_t>(action_dim_));
  for (int j = 0; j < action_dim_; ++j) out[static_cast<std::size_t>(j)] = mean(0, j);
  return out;
}

void OraclePolicy::adopt(const sac::GaussianActor<float>& learner, double score) {
  if (learner.obs_dim() != obs_dim_ || learner.action_dim() != action_dim_) {
    throw ShapeError("oracle: learner dimensions differ from the oracle's");
  }
  actor_ = learner;
  has_actor_ = true;
  kind_ = Kind::kCheckpoint;
  score_ = score;
}

bool maybe_bootstrap(OraclePolicy& oracle, const sac::GaussianActor<float>& learner, double learner_eval,
                     double oracle_eval) {
  if (!oracle.bootstrappable()) throw ConfigError("bootstrap requested on a non-bootstrappable oracle");
  if (!(learner_eval > oracle_eval)) return false;
  oracle.adopt(learner, learner_eval);
  return true;
}

int jsrl_rollin_horizon(Rng& rng, int max_h) {
  if (max_h < 0) throw ConfigError("jsrl roll-in horizon must be >= 0");
  return std::uniform_int_distribution<int>(0, max_h)(rng);
}

OraclePolicy make_oracle(std::string_view spec, std::string_view env_id) {
  if (spec == "scripted") return OraclePolicy::scripted(env_id, false);
  if (spec == "bootstrap") return OraclePolicy::scripted(env_id, true);
  const auto colon = spec.find(':');
  if (colon != std::string_view::npos) {
    const std::string_view head = spec.substr(0, colon);
    const std::string path(spec.substr(colon + 1));
    if (head == "checkpoint") return OraclePolicy::from_checkpoint(path, false);
    if (head == "bootstrap") return OraclePolicy::from_checkpoint(path, true);
  }
  throw ConfigError("unknown oracle spec '" + std::string(spec) +
                    "' (expected scripted, bootstrap, checkpoint:<path> or bootstrap:<path>)");
}

}  // namespace ccge::oracle
