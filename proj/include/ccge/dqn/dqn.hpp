#pragma once

// DQN whose network carries, next to one Q value per action, one
// non-negative uncertainty output per action trained on the bootstrapped
// Bellman-residual target. The uncertainty is logged only; action selection
// sees Q values alone.

#include <cstdint>
#include <span>
#include <vector>

#include "ccge/common/rng.hpp"
#include "ccge/nn/optim.hpp"
#include "ccge/replay/replay_buffer.hpp"
#include "ccge/sac/critic.hpp"
#include "ccge/uncertainty/formulas.hpp"

namespace ccge::dqn {

struct DqnConfig {
  std::vector<int> hidden{64, 64};
  nn::AdamWConfig optimizer{2.5e-4, 0.9, 0.999, 1e-8, 1e-2};
  double gamma = 0.99;
  std::size_t batch_size = 256;
  std::int64_t target_update_interval = 1000;  // gradient steps between hard copies
  double explore = 0.1;
  double max_grad_norm = 0.625;
};

// Epsilon-greedy over Q values; argmax ties resolve to the lowest index.
int dqn_act(std::span<const double> q_values, Rng& rng, double explore);

template <typename T>
struct DqnLoss {
  T bellman = 0;
  T uncertainty = 0;
  T total = 0;
  Vector<T> eps_targets;
  nn::GradientSet<T> grads;
};

// Network outputs are [Q_0..Q_{A-1}, raw_0..raw_{A-1}] with eps = softplus(raw).
//   y   = r + gamma (1 - d) max_b Q'(s', b)
//   tgt = sqrt((Q(s, a) - y)^2 + gamma (1 - d) eps'(s', b*)^2),  b* = argmax_b Q'(s', b)
// Loss = mean (Q(s, a) - y)^2 + mean (eps(s, a) - tgt)^2; y and tgt are constants.
// fixed_eps_targets, when given, replaces tgt.
template <typename T>
DqnLoss<T> dqn_loss(const nn::Mlp<T>& online, const nn::Mlp<T>& target, const Matrix<T>& states,
                    const std::vector<int>& actions, const Vector<T>& rewards, const Matrix<T>& next_states,
                    const Vector<T>& terminals, T gamma, const Vector<T>* fixed_eps_targets = nullptr) {
  const Eigen::Index rows = states.rows();
  const int count = online.output_size() / 2;
  if (static_cast<Eigen::Index>(actions.size()) != rows || rewards.size() != rows || terminals.size() != rows ||
      next_states.rows() != rows) {
    throw ShapeError("dqn_loss: batch fields disagree in length");
  }
  const Matrix<T> next = target.forward(next_states);
  nn::ForwardCache<T> cache;
  const Matrix<T> out = online.forward(states, cache);
  const auto batch = static_cast<T>(rows);
  Matrix<T> grad = Matrix<T>::Zero(rows, out.cols());
  DqnLoss<T> loss;
  loss.eps_targets.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= count) throw ShapeError("dqn_loss: action index out of range");
    Eigen::Index best = 0;
    const T max_next = next.row(i).leftCols(count).maxCoeff(&best);
    const T live = T(1) - terminals(i);
    const T y = rewards(i) + gamma * live * max_next;
    const T q = out(i, a);
    const T residual = q - y;
    const T eps_next = sac::softplus(next(i, count + best));
    const T tgt = fixed_eps_targets != nullptr ? (*fixed_eps_targets)(i)
                                               : std::sqrt(residual * residual + gamma * live * eps_next * eps_next);
    loss.eps_targets(i) = tgt;
    const T raw = out(i, count + a);
    const T err = sac::softplus(raw) - tgt;
    loss.bellman += residual * residual / batch;
    loss.uncertainty += err * err / batch;
    grad(i, a) = T(2) * residual / batch;
    grad(i, count + a) = T(2) * err * sac::sigmoid(raw) / batch;
  }
  loss.total = loss.bellman + loss.uncertainty;
  loss.grads = online.zero_gradients();
  online.backward(cache, grad, loss.grads);
  return loss;
}

struct DqnUpdateStats {
  double bellman_loss = 0.0;
  double uncertainty_loss = 0.0;
  bool target_synced = false;
};

class DqnAgent {
 public:
  DqnAgent(int obs_dim, int action_count, DqnConfig config, std::uint64_t init_seed);

  std::vector<double> q_values(std::span<const double> observation) const;
  // Uncertainty output for one action (logging only).
  double uncertainty(std::span<const double> observation, int action) const;

  int act(std::span<const double> observation, Rng& rng, double explore) const;
  int act(std::span<const double> observation, Rng& rng) const { return act(observation, rng, config_.explore); }
  int act_greedy(std::span<const double> observation) const;

  DqnUpdateStats update(const replay::Batch& batch);

  const nn::Mlp<float>& online() const { return online_; }
  const nn::Mlp<float>& target() const { return target_; }
  nn::Mlp<float>& online() { return online_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }
  int action_count() const { return action_count_; }
  const DqnConfig& config() const { return config_; }

 private:
  DqnConfig config_;
  int action_count_ = 0;
  nn::Mlp<float> online_;
  nn::Mlp<float> target_;
  std::int64_t gradient_steps_ = 0;
};

// Mean of the logged uncertainty values of one episode.
double episodic_mean_uncertainty(std::span<const double> values);

}  // namespace ccge::dqn
