#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ccge/nn/checkpoint.hpp"
#include "ccge/nn/optim.hpp"
#include "ccge/replay/replay_buffer.hpp"
#include "ccge/sac/critic.hpp"
#include "ccge/sac/gaussian_actor.hpp"
#include "ccge/sac/losses.hpp"

namespace ccge::sac {

struct SacConfig {
  std::vector<int> hidden{256, 256};
  nn::AdamWConfig optimizer{};
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t batch_size = 256;
  int ensemble_size = 2;
  bool explicit_uncertainty = false;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
  double initial_log_alpha = 0.0;
  std::optional<double> target_entropy;  // defaults to -action_dim
};

struct BellmanTargets {
  VectorF y;         // B
  MatrixF eps_next;  // B x members, target-network uncertainty at (s', a'); explicit mode only
};

struct CriticUpdateStats {
  double bellman_loss = 0.0;      // mean over members
  double uncertainty_loss = 0.0;  // mean over members
};

struct ActorUpdateStats {
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double supervised_fraction = 0.0;
  double mean_k = 0.0;
};

// Replacement actor objective (the CCGE switch plugs in here). Receives the
// pre-drawn reparameterisation noise and the detached temperature.
using ActorObjective = std::function<ActorLoss<float>(const GaussianActor<float>& actor,
                                                      const CriticEnsemble<float>& critics,
                                                      const replay::Batch& batch, const MatrixF& noise,
                                                      float alpha)>;

class SacAgent {
 public:
  SacAgent(int obs_dim, int action_dim, SacConfig config, std::uint64_t init_seed);

  std::vector<double> act(std::span<const double> observation, Rng& rng) const;
  std::vector<double> act_deterministic(std::span<const double> observation) const;

  BellmanTargets bellman_targets(const replay::Batch& batch, Rng& rng) const;
  BellmanTargets bellman_targets(const replay::Batch& batch, const MatrixF& next_actions,
                                 const VectorF& next_log_probs) const;

  // One AdamW step per member toward the given targets, then polyak
  // averaging of the target networks.
  CriticUpdateStats apply_critic_update(const replay::Batch& batch, const BellmanTargets& targets);
  CriticUpdateStats update_critic(const replay::Batch& batch, Rng& rng);

  // Actor step followed by the temperature step.
  ActorUpdateStats update_actor(const replay::Batch& batch, Rng& rng, const ActorObjective* objective = nullptr);

  // Gradient step on E[-log_alpha (log pi + target_entropy)].
  double update_alpha(const VectorF& log_probs);

  double alpha() const { return std::exp(log_alpha_); }
  double log_alpha() const { return log_alpha_; }
  double target_entropy() const { return target_entropy_; }
  const SacConfig& config() const { return config_; }

  GaussianActor<float>& actor() { return actor_; }
  const GaussianActor<float>& actor() const { return actor_; }
  CriticEnsemble<float>& critics() { return critics_; }
  const CriticEnsemble<float>& critics() const { return critics_; }

  nn::Checkpoint checkpoint() const;

 private:
  SacConfig config_;
  GaussianActor<float> actor_;
  CriticEnsemble<float> critics_;
  double log_alpha_ = 0.0;
  double target_entropy_ = 0.0;
  nn::ScalarAdam<double> alpha_optimizer_;
};

MatrixF to_row(std::span<const double> values);

}  // namespace ccge::sac
