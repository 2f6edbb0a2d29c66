#pragma once

// Loss functions of the soft actor-critic learner, templated on the scalar
// type so the same code runs in float for training and in double for
// finite-difference checks. Every function returns the loss value together
// with exact parameter gradients; targets passed in are constants.

#include <cmath>
#include <vector>

#include "ccge/sac/critic.hpp"
#include "ccge/sac/gaussian_actor.hpp"
#include "ccge/uncertainty/formulas.hpp"

namespace ccge::sac {

// y = r                                              if terminal
// y = r + gamma * (min_i Q'_i(s', a') - alpha log pi(a'|s'))  otherwise
inline double critic_target(double reward, bool terminal, double min_q_next, double log_prob_next, double alpha,
                            double gamma) {
  if (terminal) return reward;
  return reward + gamma * (min_q_next - alpha * log_prob_next);
}

template <typename T>
Vector<T> critic_targets(const Vector<T>& rewards, const Vector<T>& terminals, const Vector<T>& min_q_next,
                         const Vector<T>& log_prob_next, T alpha, T gamma) {
  return rewards.array() +
         gamma * (T(1) - terminals.array()) * (min_q_next.array() - alpha * log_prob_next.array());
}

template <typename T>
struct CriticLoss {
  T bellman = 0;      // mean (Q - y)^2
  T uncertainty = 0;  // mean (E - target)^2, explicit mode only
  T total = 0;
  Vector<T> eps_targets;  // targets the head regressed onto (explicit mode)
  nn::GradientSet<T> grads;
};

// How the explicit head's regression target is obtained.
template <typename T>
struct ExplicitTargets {
  // Either fixed targets ...
  const Vector<T>* fixed = nullptr;
  // ... or built from this critic's own (detached) Q prediction:
  // sqrt((Q - y)^2 + gamma (1 - d) eps_next^2).
  const Vector<T>* eps_next = nullptr;
  const Vector<T>* terminals = nullptr;
  T gamma = T(0);
};

// Squared Bellman error of one critic, plus the squared error of its
// uncertainty head when explicit is given.
template <typename T>
CriticLoss<T> critic_loss(const nn::Mlp<T>& critic, const Matrix<T>& state_actions, const Vector<T>& y,
                          const ExplicitTargets<T>* explicit_targets = nullptr) {
  CriticLoss<T> out;
  nn::ForwardCache<T> cache;
  const Matrix<T> pred = critic.forward(state_actions, cache);
  const auto batch = static_cast<T>(pred.rows());
  const Vector<T> residual = pred.col(0) - y;
  out.bellman = residual.squaredNorm() / batch;
  Matrix<T> grad_out = Matrix<T>::Zero(pred.rows(), pred.cols());
  grad_out.col(0) = T(2) * residual / batch;
  if (explicit_targets != nullptr) {
    if (pred.cols() < 2) throw ShapeError("critic_loss: explicit mode needs an uncertainty head");
    if (explicit_targets->fixed != nullptr) {
      out.eps_targets = *explicit_targets->fixed;
    } else {
      const Vector<T> delta = uncertainty::delta_batch<T>(pred.col(0), y);
      out.eps_targets = uncertainty::explicit_target_batch<T>(delta, explicit_targets->gamma,
                                                              *explicit_targets->eps_next,
                                                              *explicit_targets->terminals);
    }
    const Vector<T> raw = pred.col(1);
    const Vector<T> eps = raw.unaryExpr([](T x) { return softplus(x); });
    const Vector<T> err = eps - out.eps_targets;
    out.uncertainty = err.squaredNorm() / batch;
    grad_out.col(1) = (T(2) * err.array() * raw.unaryExpr([](T x) { return sigmoid(x); }).array() / batch).matrix();
  }
  out.total = out.bellman + out.uncertainty;
  out.grads = critic.zero_gradients();
  critic.backward(cache, grad_out, out.grads);
  return out;
}

template <typename T>
struct ActorLoss {
  T loss = 0;
  Vector<T> log_probs;
  Matrix<T> actions;
  std::vector<char> supervised;  // per-sample branch; empty means all policy-gradient
  Vector<T> k;                   // confidence coefficient when computed by the caller
  nn::GradientSet<T> grads;
};

// Per-sample actor objective on a reparameterised sample:
//   supervised[i] ? ||a_i - oracle_i||^2 : alpha log pi(a_i|s_i) - min_m Q_m(s_i, a_i)
// averaged over the batch. Critic parameters are not touched.
template <typename T>
ActorLoss<T> actor_loss_on_sample(const GaussianActor<T>& actor, const PolicySample<T>& sample,
                                  const std::vector<nn::Mlp<T>>& critics, const Matrix<T>& states, T alpha,
                                  const Matrix<T>* oracle_actions = nullptr,
                                  const std::vector<char>* supervised = nullptr) {
  const Eigen::Index rows = states.rows();
  const int act = actor.action_dim();
  const auto batch = static_cast<T>(rows);
  if (supervised != nullptr) {
    if (static_cast<Eigen::Index>(supervised->size()) != rows) {
      throw ShapeError("actor_loss: supervision mask length mismatch");
    }
    if (oracle_actions == nullptr || oracle_actions->rows() != rows || oracle_actions->cols() != act) {
      throw ShapeError("actor_loss: supervised samples need oracle actions");
    }
  }
  auto is_sup = [&](Eigen::Index i) { return supervised != nullptr && (*supervised)[static_cast<std::size_t>(i)]; };

  Matrix<T> sa(rows, states.cols() + act);
  sa << states, sample.actions;
  std::vector<nn::ForwardCache<T>> caches(critics.size());
  Matrix<T> q(rows, static_cast<Eigen::Index>(critics.size()));
  for (std::size_t m = 0; m < critics.size(); ++m) {
    q.col(static_cast<Eigen::Index>(m)) = critics[m].forward(sa, caches[m]).col(0);
  }

  ActorLoss<T> out;
  out.log_probs = sample.log_probs;
  out.actions = sample.actions;
  if (supervised != nullptr) out.supervised = *supervised;
  Matrix<T> grad_actions = Matrix<T>::Zero(rows, act);
  Vector<T> grad_log_probs = Vector<T>::Zero(rows);
  std::vector<Matrix<T>> critic_grad(critics.size());
  for (std::size_t m = 0; m < critics.size(); ++m) {
    critic_grad[m] = Matrix<T>::Zero(rows, critics[m].output_size());
  }
  T total = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (is_sup(i)) {
      const auto diff = (sample.actions.row(i) - oracle_actions->row(i)).eval();
      total += diff.squaredNorm();
      grad_actions.row(i) = T(2) * diff / batch;
    } else {
      Eigen::Index argmin = 0;
      const T min_q = q.row(i).minCoeff(&argmin);
      total += alpha * sample.log_probs(i) - min_q;
      grad_log_probs(i) = alpha / batch;
      critic_grad[static_cast<std::size_t>(argmin)](i, 0) = T(-1) / batch;
    }
  }
  out.loss = total / batch;
  for (std::size_t m = 0; m < critics.size(); ++m) {
    const Matrix<T> d_input = critics[m].input_gradient(caches[m], critic_grad[m]);
    grad_actions += d_input.rightCols(act);
  }
  out.grads = actor.network().zero_gradients();
  actor.backward(sample, grad_actions, grad_log_probs, out.grads);
  return out;
}

// Plain SAC actor loss E[alpha log pi(a|s) - min_m Q_m(s, a)].
template <typename T>
ActorLoss<T> actor_loss(const GaussianActor<T>& actor, const std::vector<nn::Mlp<T>>& critics,
                        const Matrix<T>& states, const Matrix<T>& noise, T alpha) {
  const PolicySample<T> sample = actor.sample(states, noise);
  return actor_loss_on_sample(actor, sample, critics, states, alpha);
}

template <typename T>
struct AlphaLoss {
  T loss = 0;
  T grad = 0;  // d loss / d log_alpha
};

// E[-log_alpha * (log pi + target_entropy)].
template <typename T>
AlphaLoss<T> alpha_loss(T log_alpha, const Vector<T>& log_probs, T target_entropy) {
  const T mean_term = (log_probs.array() + target_entropy).mean();
  return {-log_alpha * mean_term, -mean_term};
}

}  // namespace ccge::sac
