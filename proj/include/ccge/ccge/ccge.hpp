#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccge/common/errors.hpp"
#include "ccge/sac/losses.hpp"
#include "ccge/uncertainty/estimate.hpp"

namespace ccge::core {

struct CCGEConfig {
  double lambda = 1.0;  // +inf switches the oracle off
  bool guidance_enabled = true;
  bool supervision_enabled = true;
  double denominator_epsilon = 1e-6;

  // With both switches off the oracle is never consulted and training is
  // plain SAC.
  bool active() const { return guidance_enabled || supervision_enabled; }

  void validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(denominator_epsilon > 0.0)) throw ConfigError("denominator_epsilon must be > 0");
  }
};

inline double q_upper_bound(const uncertainty::UncertaintyEstimate& est) { return est.q_value + est.epsilon; }

inline double potential_improvement(double ub_oracle, double ub_learner) { return ub_oracle - ub_learner; }

inline double confidence_k(double delta, double q_learner, double guard) {
  return delta / std::max(std::abs(q_learner), guard);
}

// The single decision rule shared by rollouts and the actor loss.
inline bool confident_in_oracle(double k, double lambda) { return k >= lambda; }

struct RolloutChoice {
  std::vector<double> action;
  bool guided = false;
};

inline RolloutChoice select_rollout_action(std::span<const double> learner, std::span<const double> oracle,
                                           double k, double lambda, bool training, bool guidance_enabled) {
  if (learner.size() != oracle.size()) throw ShapeError("select_rollout_action: action size mismatch");
  const bool guided = training && guidance_enabled && confident_in_oracle(k, lambda);
  const auto src = guided ? oracle : learner;
  return {std::vector<double>(src.begin(), src.end()), guided};
}

// Mean over rows of ||a - oracle||^2.
template <typename T>
T supervision_loss(const Matrix<T>& actions, const Matrix<T>& oracle_actions) {
  if (actions.rows() != oracle_actions.rows() || actions.cols() != oracle_actions.cols()) {
    throw ShapeError("supervision_loss: action shape mismatch");
  }
  if (actions.rows() == 0) return T(0);
  return (actions - oracle_actions).rowwise().squaredNorm().mean();
}

// k for each row: learner action a vs oracle action, both scored with the
// same online critics and uncertainty mode.
template <typename T>
Vector<T> confidence_batch(uncertainty::Mode mode, const sac::CriticEnsemble<T>& critics, const Matrix<T>& states,
                           const Matrix<T>& learner_actions, const Matrix<T>& oracle_actions, double guard) {
  const auto learner = uncertainty::estimate_batch(mode, critics, states, learner_actions);
  const auto oracle = uncertainty::estimate_batch(mode, critics, states, oracle_actions);
  Vector<T> k(states.rows());
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    const double ub_learner = static_cast<double>(learner.q(i)) + static_cast<double>(learner.eps(i));
    const double ub_oracle = static_cast<double>(oracle.q(i)) + static_cast<double>(oracle.eps(i));
    k(i) = static_cast<T>(
        confidence_k(potential_improvement(ub_oracle, ub_learner), static_cast<double>(learner.q(i)), guard));
  }
  return k;
}

// Per-sample switch between supervision toward the oracle action and the
// SAC actor objective. k is computed on the same reparameterised sample the
// loss is taken on.
template <typename T>
sac::ActorLoss<T> ccge_actor_loss(const sac::GaussianActor<T>& actor, const sac::CriticEnsemble<T>& critics,
                                  uncertainty::Mode mode, const Matrix<T>& states, const Matrix<T>* oracle_actions,
                                  const Matrix<T>& noise, T alpha, const CCGEConfig& config) {
  if (oracle_actions == nullptr || oracle_actions->rows() != states.rows() ||
      oracle_actions->cols() != actor.action_dim()) {
    throw ShapeError("ccge_actor_loss: batch carries no oracle actions");
  }
  const sac::PolicySample<T> sample = actor.sample(states, noise);
  const Vector<T> k =
      confidence_batch(mode, critics, states, sample.actions, *oracle_actions, config.denominator_epsilon);
  std::vector<char> supervised(static_cast<std::size_t>(states.rows()), 0);
  if (config.supervision_enabled) {
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      supervised[static_cast<std::size_t>(i)] = confident_in_oracle(static_cast<double>(k(i)), config.lambda) ? 1 : 0;
    }
  }
  auto loss = sac::actor_loss_on_sample(actor, sample, critics.online(), states, alpha, oracle_actions, &supervised);
  loss.k = k;
  return loss;
}

// Number of rows a frozen snapshot would hand to the oracle at this lambda.
template <typename T>
std::size_t guided_count(const Vector<T>& k, double lambda) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < k.size(); ++i) count += confident_in_oracle(static_cast<double>(k(i)), lambda) ? 1 : 0;
  return count;
}

class GuidanceStats {
 public:
  void record(bool guided) {
    ++total_;
    guided_ += guided ? 1 : 0;
    flags_.push_back(guided ? 1 : 0);
  }

  std::size_t guided() const { return guided_; }
  std::size_t total() const { return total_; }

  // Ratio over steps [begin, end) of the recorded history.
  double ratio(std::size_t begin, std::size_t end) const {
    if (end > flags_.size()) end = flags_.size();
    if (begin >= end) throw std::invalid_argument("guidance_ratio: empty interval");
    std::size_t g = 0;
    for (std::size_t i = begin; i < end; ++i) g += flags_[i];
    return static_cast<double>(g) / static_cast<double>(end - begin);
  }

  // Ratios over consecutive intervals of the given length; the last one may
  // be shorter.
  std::vector<double> interval_ratios(std::size_t interval) const {
    if (interval == 0) throw std::invalid_argument("guidance_ratio: interval must be positive");
    std::vector<double> out;
    for (std::size_t b = 0; b < flags_.size(); b += interval) out.push_back(ratio(b, b + interval));
    return out;
  }

 private:
  std::size_t guided_ = 0;
  std::size_t total_ = 0;
  std::vector<char> flags_;
};

inline double guidance_ratio(std::size_t guided, std::size_t total) {
  if (total == 0) throw std::invalid_argument("guidance_ratio: empty interval");
  if (guided > total) throw std::invalid_argument("guidance_ratio: guided exceeds total");
  return static_cast<double>(guided) / static_cast<double>(total);
}

}  // namespace ccge::core
