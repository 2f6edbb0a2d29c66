#pragma once

// Squashed Gaussian policy. The network maps a state to [mean | log_std]
// per action component; actions are a = tanh(mean + exp(log_std) * noise)
// with noise ~ N(0, I) supplied by the caller (reparameterisation), and
// log_std clamped to [kLogStdMin, kLogStdMax].

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ccge/common/rng.hpp"
#include "ccge/nn/mlp.hpp"

namespace ccge::sac {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// log(1 - tanh(u)^2) without cancellation.
template <typename T>
T log_one_minus_tanh_sq(T u) {
  const T x = T(-2) * u;
  const T softplus = x > T(20) ? x : std::log1p(std::exp(x));
  return T(2) * (T(std::numbers::ln2) - u - softplus);
}

// Log density of a squashed Gaussian at action a in (-1, 1), summed over
// components.
template <typename T>
T squashed_log_prob(const Vector<T>& mean, const Vector<T>& log_std, const Vector<T>& action) {
  T total = 0;
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    const T u = std::atanh(action(j));
    const T z = (u - mean(j)) / std::exp(log_std(j));
    total += T(-0.5) * z * z - log_std(j) - T(0.5) * std::log(T(2) * T(std::numbers::pi)) -
             log_one_minus_tanh_sq(u);
  }
  return total;
}

template <typename T>
struct PolicySample {
  Matrix<T> actions;    // B x A, squashed
  Vector<T> log_probs;  // B
  Matrix<T> mean;
  Matrix<T> log_std;    // after clamping
  Matrix<T> noise;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_inside;  // clamp inactive
  nn::ForwardCache<T> cache;
};

template <typename T>
class GaussianActor {
 public:
  GaussianActor() = default;
  GaussianActor(nn::Mlp<T> net, int action_dim) : net_(std::move(net)), action_dim_(action_dim) {
    if (net_.output_size() != 2 * action_dim_) {
      throw ShapeError("GaussianActor: network must output 2 * action_dim values");
    }
  }

  // Fresh actor: uniform fan-in init, final layer scaled by 0.01 so initial
  // actions are close to tanh(0) with unit spread.
  template <typename Generator>
  static GaussianActor create(int obs_dim, int action_dim, const std::vector<int>& hidden, Generator& rng) {
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2 * action_dim);
    return GaussianActor(nn::Mlp<T>::uniform_fan_in(sizes, rng, T(0.01)), action_dim);
  }

  nn::Mlp<T>& network() { return net_; }
  const nn::Mlp<T>& network() const { return net_; }
  int action_dim() const { return action_dim_; }
  int obs_dim() const { return net_.input_size(); }

  template <typename Generator>
  Matrix<T> draw_noise(Eigen::Index rows, Generator& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix<T> noise(rows, action_dim_);
    for (Eigen::Index c = 0; c < noise.cols(); ++c) {
      for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = static_cast<T>(normal(rng));
    }
    return noise;
  }

  PolicySample<T> sample(const Matrix<T>& states, const Matrix<T>& noise) const {
    if (noise.rows() != states.rows() || noise.cols() != action_dim_) {
      throw ShapeError("GaussianActor::sample: noise shape mismatch");
    }
    PolicySample<T> out;
    const Matrix<T> raw = net_.forward(states, out.cache);
    out.mean = raw.leftCols(action_dim_);
    const Matrix<T> raw_log_std = raw.rightCols(action_dim_);
    out.log_std = raw_log_std.cwiseMax(T(kLogStdMin)).cwiseMin(T(kLogStdMax));
    out.log_std_inside = (raw_log_std.array() >= T(kLogStdMin)) && (raw_log_std.array() <= T(kLogStdMax));
    out.noise = noise;
    const Matrix<T> pre = out.mean.array() + out.log_std.array().exp() * noise.array();
    out.actions = pre.array().tanh();
    const T half_log_2pi = T(0.5) * std::log(T(2) * T(std::numbers::pi));
    out.log_probs.resize(states.rows());
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      T lp = 0;
      for (Eigen::Index j = 0; j < action_dim_; ++j) {
        const T xi = noise(i, j);
        lp += T(-0.5) * xi * xi - out.log_std(i, j) - half_log_2pi - log_one_minus_tanh_sq(pre(i, j));
      }
      out.log_probs(i) = lp;
    }
    return out;
  }

  // Deterministic action tanh(mean), used for evaluation and oracles.
  Matrix<T> mean_action(const Matrix<T>& states) const {
    return net_.forward(states).leftCols(action_dim_).array().tanh();
  }

  Vector<T> mean_action(const Vector<T>& state) const {
    const Matrix<T> row = state.transpose();
    return mean_action(row).row(0).transpose();
  }

  // Accumulates the parameter gradient of
  //   sum_i [ <grad_actions_i, a_i> + grad_log_probs_i * log_prob_i ]
  // with the noise held fixed.
  void backward(const PolicySample<T>& s, const Matrix<T>& grad_actions, const Vector<T>& grad_log_probs,
                nn::GradientSet<T>& grads) const {
    const Eigen::Index rows = s.actions.rows();
    Matrix<T> grad_out(rows, 2 * action_dim_);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < action_dim_; ++j) {
        const T a = s.actions(i, j);
        const T sigma = std::exp(s.log_std(i, j));
        const T dtanh = T(1) - a * a;
        const T g_a = grad_actions(i, j);
        const T g_lp = grad_log_probs(i);
        grad_out(i, j) = g_a * dtanh + g_lp * T(2) * a;
        const T d_log_std = g_a * dtanh * sigma * s.noise(i, j) + g_lp * (T(-1) + T(2) * a * sigma * s.noise(i, j));
        grad_out(i, action_dim_ + j) = s.log_std_inside(i, j) ? d_log_std : T(0);
      }
    }
    net_.backward(s.cache, grad_out, grads);
  }

  template <typename U>
  GaussianActor<U> cast() const {
    return GaussianActor<U>(net_.template cast<U>(), action_dim_);
  }

 private:
  nn::Mlp<T> net_;
  int action_dim_ = 0;
};

}  // namespace ccge::sac
