#include "ccge/sac/agent.hpp"

#include <cmath>
#include <string>

namespace ccge::sac {
namespace {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NonFiniteError(std::string("non-finite ") + what);
}

}  // namespace

MatrixF to_row(std::span<const double> values) {
  MatrixF row(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = static_cast<float>(values[i]);
  return row;
}

SacAgent::SacAgent(int obs_dim, int action_dim, SacConfig config, std::uint64_t init_seed)
    : config_(std::move(config)) {
  Rng rng = make_rng(init_seed, Stream::kInit);
  actor_ = GaussianActor<float>::create(obs_dim, action_dim, config_.hidden, rng);
  critics_ = CriticEnsemble<float>(obs_dim, action_dim, config_.hidden, config_.ensemble_size,
                                   config_.explicit_uncertainty, rng);
  log_alpha_ = config_.initial_log_alpha;
  target_entropy_ = config_.target_entropy.value_or(-static_cast<double>(action_dim));
}

std::vector<double> SacAgent::act(std::span<const double> observation, Rng& rng) const {
  const MatrixF state = to_row(observation);
  const MatrixF noise = actor_.draw_noise(1, rng);
  const auto sample = actor_.sample(state, noise);
  std::vector<double> out(static_cast<std::size_t>(actor_.action_dim()));
  for (int j = 0; j < actor_.action_dim(); ++j) out[static_cast<std::size_t>(j)] = sample.actions(0, j);
  return out;
}

std::vector<double> SacAgent::act_deterministic(std::span<const double> observation) const {
  const MatrixF mean = actor_.mean_action(to_row(observation));
  std::vector<double> out(static_cast<std::size_t>(actor_.action_dim()));
  for (int j = 0; j < actor_.action_dim(); ++j) out[static_cast<std::size_t>(j)] = mean(0, j);
  return out;
}

BellmanTargets SacAgent::bellman_targets(const replay::Batch& batch, Rng& rng) const {
  const MatrixF noise = actor_.draw_noise(batch.next_states.rows(), rng);
  const auto next = actor_.sample(batch.next_states, noise);
  return bellman_targets(batch, next.actions, next.log_probs);
}

BellmanTargets SacAgent::bellman_targets(const replay::Batch& batch, const MatrixF& next_actions,
                                         const VectorF& next_log_probs) const {
  const CriticOutput<float> next = critics_.evaluate(batch.next_states, next_actions, /*use_target=*/true);
  BellmanTargets out;
  out.y = critic_targets<float>(batch.rewards, batch.terminals, next.min_q(), next_log_probs,
                                static_cast<float>(alpha()), static_cast<float>(config_.gamma));
  out.eps_next = next.eps;
  return out;
}

CriticUpdateStats SacAgent::apply_critic_update(const replay::Batch& batch, const BellmanTargets& targets) {
  const MatrixF sa = critics_.join(batch.states, batch.actions);
  CriticUpdateStats stats;
  const auto members = static_cast<std::size_t>(critics_.size());
  for (std::size_t m = 0; m < members; ++m) {
    auto& critic = critics_.online()[m];
    CriticLoss<float> loss;
    if (critics_.explicit_head()) {
      const VectorF eps_next = targets.eps_next.col(static_cast<Eigen::Index>(m));
      ExplicitTargets<float> spec;
      spec.eps_next = &eps_next;
      spec.terminals = &batch.terminals;
      spec.gamma = static_cast<float>(config_.gamma);
      loss = critic_loss<float>(critic, sa, targets.y, &spec);
    } else {
      loss = critic_loss<float>(critic, sa, targets.y);
    }
    require_finite(loss.total, "critic loss");
    if (!loss.grads.all_finite()) throw NonFiniteError("non-finite critic gradient");
    if (config_.max_grad_norm > 0.0) nn::clip_grad_norm(loss.grads, static_cast<float>(config_.max_grad_norm));
    nn::adamw_step(critic, loss.grads, config_.optimizer);
    stats.bellman_loss += loss.bellman / static_cast<double>(members);
    stats.uncertainty_loss += loss.uncertainty / static_cast<double>(members);
  }
  critics_.polyak(static_cast<float>(config_.tau));
  return stats;
}

CriticUpdateStats SacAgent::update_critic(const replay::Batch& batch, Rng& rng) {
  return apply_critic_update(batch, bellman_targets(batch, rng));
}

ActorUpdateStats SacAgent::update_actor(const replay::Batch& batch, Rng& rng, const ActorObjective* objective) {
  const MatrixF noise = actor_.draw_noise(batch.states.rows(), rng);
  const auto alpha_now = static_cast<float>(alpha());
  ActorLoss<float> loss = objective != nullptr
                              ? (*objective)(actor_, critics_, batch, noise, alpha_now)
                              : actor_loss<float>(actor_, critics_.online(), batch.states, noise, alpha_now);
  require_finite(loss.loss, "actor loss");
  if (!loss.grads.all_finite()) throw NonFiniteError("non-finite actor gradient");
  if (config_.max_grad_norm > 0.0) nn::clip_grad_norm(loss.grads, static_cast<float>(config_.max_grad_norm));
  nn::adamw_step(actor_.network(), loss.grads, config_.optimizer);

  ActorUpdateStats stats;
  stats.actor_loss = loss.loss;
  if (!loss.supervised.empty()) {
    std::size_t count = 0;
    for (char s : loss.supervised) count += s ? 1 : 0;
    stats.supervised_fraction = static_cast<double>(count) / static_cast<double>(loss.supervised.size());
  }
  if (loss.k.size() > 0) stats.mean_k = loss.k.cast<double>().mean();
  stats.alpha_loss = update_alpha(loss.log_probs);
  stats.alpha = alpha();
  return stats;
}

double SacAgent::update_alpha(const VectorF& log_probs) {
  const AlphaLoss<double> loss =
      alpha_loss<double>(log_alpha_, log_probs.cast<double>(), target_entropy_);
  require_finite(loss.loss, "alpha loss");
  nn::AdamWConfig cfg = config_.optimizer;
  cfg.weight_decay = 0.0;
  alpha_optimizer_.apply(log_alpha_, loss.grad, cfg);
  return loss.loss;
}

nn::Checkpoint SacAgent::checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.networks.emplace("actor", actor_.network());
  for (int m = 0; m < critics_.size(); ++m) {
    ckpt.networks.emplace("critic" + std::to_string(m), critics_.online()[static_cast<std::size_t>(m)]);
    ckpt.networks.emplace("critic_target" + std::to_string(m), critics_.target()[static_cast<std::size_t>(m)]);
  }
  ckpt.metadata["log_alpha"] = log_alpha_;
  ckpt.metadata["action_dim"] = actor_.action_dim();
  ckpt.metadata["obs_dim"] = actor_.obs_dim();
  ckpt.metadata["explicit_uncertainty"] = critics_.explicit_head();
  return ckpt;
}

}  // namespace ccge::sac
