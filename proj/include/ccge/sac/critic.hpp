#pragma once

#include <cmath>
#include <vector>

#include "ccge/common/errors.hpp"
#include "ccge/nn/mlp.hpp"
#include "ccge/nn/optim.hpp"

namespace ccge::sac {

template <typename T>
T softplus(T x) {
  return x > T(20) ? x : std::log1p(std::exp(x));
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

// Per-member outputs for a batch of (s, a): q(i, m) is member m's value for
// row i; eps(i, m) its non-negative uncertainty head (explicit mode only,
// otherwise zero columns).
template <typename T>
struct CriticOutput {
  Matrix<T> q;
  Matrix<T> eps;

  Vector<T> min_q() const { return q.rowwise().minCoeff(); }
};

// Ensemble of Q networks over the concatenated input [s, a]. Each network
// emits Q, plus a raw uncertainty value in explicit mode that is mapped
// through softplus to keep it non-negative.
template <typename T>
class CriticEnsemble {
 public:
  CriticEnsemble() = default;

  template <typename Generator>
  CriticEnsemble(int obs_dim, int action_dim, const std::vector<int>& hidden, int members, bool explicit_head,
                 Generator& rng)
      : obs_dim_(obs_dim), action_dim_(action_dim), explicit_head_(explicit_head) {
    if (members < 1) throw ConfigError("CriticEnsemble: need at least one member");
    std::vector<int> sizes{obs_dim + action_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(explicit_head ? 2 : 1);
    for (int m = 0; m < members; ++m) online_.push_back(nn::Mlp<T>::uniform_fan_in(sizes, rng));
    target_ = online_;
    for (auto& t : target_) t.reset_optimizer();
  }

  CriticEnsemble(std::vector<nn::Mlp<T>> online, int obs_dim, int action_dim, bool explicit_head)
      : obs_dim_(obs_dim), action_dim_(action_dim), explicit_head_(explicit_head), online_(std::move(online)) {
    for (const auto& net : online_) {
      if (net.input_size() != obs_dim + action_dim || net.output_size() != (explicit_head ? 2 : 1)) {
        throw ShapeError("CriticEnsemble: member shape does not match (obs, action, head) layout");
      }
    }
    target_ = online_;
  }

  int size() const { return static_cast<int>(online_.size()); }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  bool explicit_head() const { return explicit_head_; }

  std::vector<nn::Mlp<T>>& online() { return online_; }
  const std::vector<nn::Mlp<T>>& online() const { return online_; }
  std::vector<nn::Mlp<T>>& target() { return target_; }
  const std::vector<nn::Mlp<T>>& target() const { return target_; }

  Matrix<T> join(const Matrix<T>& states, const Matrix<T>& actions) const {
    if (states.cols() != obs_dim_ || actions.cols() != action_dim_ || states.rows() != actions.rows()) {
      throw ShapeError("CriticEnsemble: state/action shape mismatch");
    }
    Matrix<T> sa(states.rows(), obs_dim_ + action_dim_);
    sa << states, actions;
    return sa;
  }

  CriticOutput<T> evaluate(const Matrix<T>& states, const Matrix<T>& actions, bool use_target = false) const {
    const Matrix<T> sa = join(states, actions);
    const auto& nets = use_target ? target_ : online_;
    CriticOutput<T> out;
    out.q.resize(sa.rows(), size());
    out.eps.resize(sa.rows(), explicit_head_ ? size() : 0);
    for (int m = 0; m < size(); ++m) {
      const Matrix<T> raw = nets[static_cast<std::size_t>(m)].forward(sa);
      out.q.col(m) = raw.col(0);
      if (explicit_head_) out.eps.col(m) = raw.col(1).unaryExpr([](T x) { return softplus(x); });
    }
    return out;
  }

  void polyak(T tau) {
    for (std::size_t m = 0; m < online_.size(); ++m) nn::polyak_update(target_[m], online_[m], tau);
  }

 private:
  int obs_dim_ = 0;
  int action_dim_ = 0;
  bool explicit_head_ = false;
  std::vector<nn::Mlp<T>> online_;
  std::vector<nn::Mlp<T>> target_;
};

}  // namespace ccge::sac
