#pragma once

// Epistemic-uncertainty arithmetic shared by the SAC critics and the DQN
// study. All functions here are pure.

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>

#include "ccge/common/eigen.hpp"
#include "ccge/common/errors.hpp"

namespace ccge::uncertainty {

enum class Mode { kImplicit, kExplicit };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);

struct UncertaintyEstimate {
  double q_value = 0.0;  // ensemble minimum
  double epsilon = 0.0;  // >= 0
  Mode mode = Mode::kImplicit;
};

// Ensemble-variance proxy: epsilon is the population variance of the
// members' Q values, q_value their minimum. Needs at least two members.
inline UncertaintyEstimate implicit_uncertainty(std::span<const double> q_values) {
  if (q_values.size() < 2) throw ConfigError("implicit uncertainty needs an ensemble of at least two critics");
  double mean = 0.0;
  for (double q : q_values) mean += q;
  mean /= static_cast<double>(q_values.size());
  double var = 0.0;
  for (double q : q_values) var += (q - mean) * (q - mean);
  var /= static_cast<double>(q_values.size());
  return {*std::min_element(q_values.begin(), q_values.end()), var, Mode::kImplicit};
}

// Single-step epistemic uncertainty: the squared Bellman residual of one
// sampled transition.
inline double delta_t(double q, double reward, double gamma, double q_next, bool terminal) {
  const double residual = q - reward - gamma * q_next * (terminal ? 0.0 : 1.0);
  return residual * residual;
}

// Bootstrapped regression target for the uncertainty head:
// sqrt(delta + gamma * eps_next^2), or sqrt(delta) at a terminal state.
inline double explicit_target(double delta, double gamma, double eps_next, bool terminal) {
  const double carry = terminal ? 0.0 : gamma * eps_next * eps_next;
  return std::sqrt(std::max(0.0, delta + carry));
}

// Batched forms. q holds the (detached) online value of one critic, y the
// Bellman target that already contains reward, discount and termination.
template <typename T>
Vector<T> delta_batch(const Vector<T>& q, const Vector<T>& y) {
  return (q - y).array().square();
}

template <typename T>
Vector<T> explicit_target_batch(const Vector<T>& delta, T gamma, const Vector<T>& eps_next, const Vector<T>& terminals) {
  return (delta.array() + gamma * (T(1) - terminals.array()) * eps_next.array().square()).max(T(0)).sqrt();
}

}  // namespace ccge::uncertainty
