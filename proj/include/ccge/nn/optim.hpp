#pragma once

#include <algorithm>
#include <cmath>

#include "ccge/common/errors.hpp"
#include "ccge/nn/mlp.hpp"

namespace ccge::nn {

struct AdamWConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-2;
};

namespace detail {

template <typename T, typename Param, typename Grad, typename Moment>
void adamw_tensor(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamWConfig& cfg,
                  T bias1, T bias2) {
  const T lr = static_cast<T>(cfg.learning_rate);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T eps = static_cast<T>(cfg.epsilon);
  if (cfg.weight_decay != 0.0) {
    param *= T(1) - lr * static_cast<T>(cfg.weight_decay);
  }
  m = b1 * m + (T(1) - b1) * grad;
  v = b2 * v + (T(1) - b2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
}

template <typename T>
void check_congruent(const Mlp<T>& net, const GradientSet<T>& grads) {
  if (grads.layers.size() != net.layers().size()) {
    throw ShapeError("gradient set does not match network layer count");
  }
  for (std::size_t i = 0; i < grads.layers.size(); ++i) {
    if (grads.layers[i].weight.rows() != net.layers()[i].weight.rows() ||
        grads.layers[i].weight.cols() != net.layers()[i].weight.cols() ||
        grads.layers[i].bias.size() != net.layers()[i].bias.size()) {
      throw ShapeError("gradient set does not match network layer " + std::to_string(i));
    }
  }
}

}  // namespace detail

// Adam with decoupled weight decay: theta <- theta * (1 - lr * wd), then the
// bias-corrected Adam step. Increments the step counter.
template <typename T>
void adamw_step(Mlp<T>& net, const GradientSet<T>& grads, const AdamWConfig& cfg) {
  detail::check_congruent(net, grads);
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
    throw ConfigError("adamw_step: betas must lie in [0, 1)");
  }
  auto& state = net.optimizer_state();
  if (state.first_moment.size() != net.layers().size()) net.reset_optimizer();
  ++state.step;
  const T bias1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T bias2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(state.step)));
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    detail::adamw_tensor<T>(layer.weight, grads.layers[l].weight, state.first_moment[l].weight,
                            state.second_moment[l].weight, cfg, bias1, bias2);
    detail::adamw_tensor<T>(layer.bias, grads.layers[l].bias, state.first_moment[l].bias,
                            state.second_moment[l].bias, cfg, bias1, bias2);
  }
}

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
template <typename T>
T clip_grad_norm(GradientSet<T>& grads, T max_norm) {
  if (!(max_norm > T(0))) throw ConfigError("clip_grad_norm: max_norm must be positive");
  const T norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

// target <- tau * online + (1 - tau) * target, elementwise.
template <typename T>
void polyak_update(Mlp<T>& target, const Mlp<T>& online, T tau) {
  if (!target.same_architecture(online)) {
    throw ShapeError("polyak_update: target and online architectures differ");
  }
  if (tau < T(0) || tau > T(1)) throw ConfigError("polyak_update: tau must lie in [0, 1]");
  for (std::size_t l = 0; l < target.layers().size(); ++l) {
    auto& dst = target.layers()[l];
    const auto& src = online.layers()[l];
    if (tau == T(1)) {
      dst.weight = src.weight;
      dst.bias = src.bias;
    } else if (tau != T(0)) {
      dst.weight = tau * src.weight + (T(1) - tau) * dst.weight;
      dst.bias = tau * src.bias + (T(1) - tau) * dst.bias;
    }
  }
}

// Plain Adam on a single scalar (the entropy temperature).
template <typename T>
struct ScalarAdam {
  T first = 0;
  T second = 0;
  std::int64_t step = 0;

  void apply(T& param, T grad, const AdamWConfig& cfg) {
    ++step;
    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    first = b1 * first + (T(1) - b1) * grad;
    second = b2 * second + (T(1) - b2) * grad * grad;
    const T m_hat = first / static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
    const T v_hat = second / static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(step)));
    param -= static_cast<T>(cfg.learning_rate) * m_hat / (std::sqrt(v_hat) + static_cast<T>(cfg.epsilon));
  }
};

}  // namespace ccge::nn
