#pragma once

#include <vector>

#include "ccge/sac/critic.hpp"
#include "ccge/uncertainty/formulas.hpp"

namespace ccge::uncertainty {

// Row-wise estimates for a batch of (s, a).
template <typename T>
struct BatchEstimate {
  Vector<T> q;    // ensemble minimum
  Vector<T> eps;  // >= 0
};

template <typename T>
BatchEstimate<T> from_output(Mode mode, const sac::CriticOutput<T>& out) {
  BatchEstimate<T> est;
  est.q = out.min_q();
  if (mode == Mode::kImplicit) {
    if (out.q.cols() < 2) throw ConfigError("implicit uncertainty needs an ensemble of at least two critics");
    const Vector<T> mean = out.q.rowwise().mean();
    est.eps = (out.q.colwise() - mean).array().square().rowwise().sum() / static_cast<T>(out.q.cols());
  } else {
    if (out.eps.cols() == 0) throw ConfigError("explicit uncertainty needs critics with an uncertainty head");
    est.eps = out.eps.rowwise().mean();
  }
  return est;
}

template <typename T>
BatchEstimate<T> estimate_batch(Mode mode, const sac::CriticEnsemble<T>& critics, const Matrix<T>& states,
                                const Matrix<T>& actions) {
  return from_output(mode, critics.evaluate(states, actions));
}

template <typename T>
UncertaintyEstimate estimate(Mode mode, const sac::CriticEnsemble<T>& critics, const Vector<T>& state,
                             const Vector<T>& action) {
  const Matrix<T> s = state.transpose();
  const Matrix<T> a = action.transpose();
  const auto est = estimate_batch(mode, critics, s, a);
  return {static_cast<double>(est.q(0)), static_cast<double>(est.eps(0)), mode};
}

}  // namespace ccge::uncertainty
