#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccge/common/rng.hpp"
#include "ccge/sac/gaussian_actor.hpp"

namespace ccge::oracle {

enum class Kind { kScriptedPd, kCheckpoint, kBootstrap };

std::string_view to_string(Kind kind);

// PD waypoint controller on the PointMass observation layout:
// a = clamp(kp * (target - p) - kd * v, -1, 1) per axis.
struct PdGains {
  double kp = 0.8;
  double kd = 0.6;
};
std::vector<double> pd_waypoint_action(std::span<const double> observation, const PdGains& gains = {});

// Energy-pumping swing-up with a PD catch near upright, on the pendulum
// observation (cos, sin, theta_dot).
std::vector<double> pendulum_swing_action(std::span<const double> observation);

class OraclePolicy {
 public:
  using Controller = std::function<std::vector<double>(std::span<const double>)>;

  // Scripted controller for an environment id (pointmass-* or pendulum).
  static OraclePolicy scripted(std::string_view env_id, bool bootstrappable = false);
  static OraclePolicy scripted(Controller controller, int obs_dim, int action_dim, bool bootstrappable = false);
  static OraclePolicy from_actor(sac::GaussianActor<float> actor, bool bootstrappable = false);
  // Reads the "actor" network of a checkpoint file.
  static OraclePolicy from_checkpoint(const std::string& path, bool bootstrappable = false);

  // Deterministic suggestion in [-1, 1]^action_dim.
  std::vector<double> act(std::span<const double> observation) const;

  Kind kind() const { return kind_; }
  bool bootstrappable() const { return bootstrappable_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  std::optional<double> score() const { return score_; }
  void set_score(double score) { score_ = score; }
  const sac::GaussianActor<float>* actor() const { return has_actor_ ? &actor_ : nullptr; }

  // Replaces the policy with a copy of the learner's actor.
  void adopt(const sac::GaussianActor<float>& learner, double score);

 private:
  Kind kind_ = Kind::kScriptedPd;
  bool bootstrappable_ = false;
  int obs_dim_ = 0;
  int action_dim_ = 0;
  Controller controller_;
  sac::GaussianActor<float> actor_;
  bool has_actor_ = false;
  std::optional<double> score_;
};

// Copies the learner into the oracle when learner_eval > oracle_eval
// strictly. Returns whether a copy happened.
bool maybe_bootstrap(OraclePolicy& oracle, const sac::GaussianActor<float>& learner, double learner_eval,
                     double oracle_eval);

// Uniform on {0, ..., max_h}.
int jsrl_rollin_horizon(Rng& rng, int max_h);

// Parses "scripted", "checkpoint:<path>" or "bootstrap:<path>". A bare
// "bootstrap" starts from the scripted controller.
OraclePolicy make_oracle(std::string_view spec, std::string_view env_id);

}  // namespace ccge::oracle
