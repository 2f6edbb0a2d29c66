#include "ccge/dqn/dqn.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace ccge::dqn {

int dqn_act(std::span<const double> q_values, Rng& rng, double explore) {
  if (q_values.empty()) throw ShapeError("dqn_act: no actions");
  if (!(explore >= 0.0 && explore <= 1.0)) throw ConfigError("dqn_act: exploration ratio must lie in [0, 1]");
  if (explore > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < explore) {
      return std::uniform_int_distribution<int>(0, static_cast<int>(q_values.size()) - 1)(rng);
    }
  }
  int best = 0;
  for (std::size_t i = 1; i < q_values.size(); ++i) {
    if (q_values[i] > q_values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

DqnAgent::DqnAgent(int obs_dim, int action_count, DqnConfig config, std::uint64_t init_seed)
    : config_(std::move(config)), action_count_(action_count) {
  if (action_count < 2) throw ConfigError("dqn: need at least two actions");
  Rng rng = make_rng(init_seed, Stream::kInit);
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
  sizes.push_back(2 * action_count);
  online_ = nn::Mlp<float>::uniform_fan_in(sizes, rng);
  target_ = online_;
  target_.reset_optimizer();
}

namespace {

MatrixF row_of(std::span<const double> values) {
  MatrixF row(1, static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = static_cast<float>(values[i]);
  return row;
}

}  // namespace

std::vector<double> DqnAgent::q_values(std::span<const double> observation) const {
  const MatrixF out = online_.forward(row_of(observation));
  std::vector<double> q(static_cast<std::size_t>(action_count_));
  for (int a = 0; a < action_count_; ++a) q[static_cast<std::size_t>(a)] = out(0, a);
  return q;
}

double DqnAgent::uncertainty(std::span<const double> observation, int action) const {
  if (action < 0 || action >= action_count_) throw ShapeError("DqnAgent::uncertainty: action index out of range");
  const MatrixF out = online_.forward(row_of(observation));
  return sac::softplus(static_cast<double>(out(0, action_count_ + action)));
}

int DqnAgent::act(std::span<const double> observation, Rng& rng, double explore) const {
  const std::vector<double> q = q_values(observation);
  return dqn_act(q, rng, explore);
}

int DqnAgent::act_greedy(std::span<const double> observation) const {
  Rng unused;
  return act(observation, unused, 0.0);
}

DqnUpdateStats DqnAgent::update(const replay::Batch& batch) {
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    actions[i] = static_cast<int>(std::lround(batch.actions(static_cast<Eigen::Index>(i), 0)));
  }
  DqnLoss<float> loss = dqn_loss<float>(online_, target_, batch.states, actions, batch.rewards, batch.next_states,
                                        batch.terminals, static_cast<float>(config_.gamma));
  if (!std::isfinite(loss.total) || !loss.grads.all_finite()) throw NonFiniteError("non-finite dqn loss");
  if (config_.max_grad_norm > 0.0) nn::clip_grad_norm(loss.grads, static_cast<float>(config_.max_grad_norm));
  nn::adamw_step(online_, loss.grads, config_.optimizer);
  ++gradient_steps_;
  DqnUpdateStats stats{loss.bellman, loss.uncertainty, false};
  if (config_.target_update_interval > 0 && gradient_steps_ % config_.target_update_interval == 0) {
    nn::polyak_update(target_, online_, 1.0f);
    stats.target_synced = true;
  }
  return stats;
}

double episodic_mean_uncertainty(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("episodic_mean_uncertainty: empty trajectory");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace ccge::dqn
