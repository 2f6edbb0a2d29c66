#pragma once

// Dense feed-forward networks with hand-written reverse mode.
//
// Topology is fixed: every hidden layer is affine + ReLU, the output layer
// is affine only. Batches are matrices with one sample per row, so a layer
// computes  Z = X * W^T + 1 b^T  with W stored as (out x in).

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "ccge/common/eigen.hpp"
#include "ccge/common/errors.hpp"

namespace ccge::nn {

template <typename T>
struct DenseLayer {
  Matrix<T> weight;  // out x in
  Vector<T> bias;    // out
};

// One array per parameter array of the owning network, same shapes.
template <typename T>
struct GradientSet {
  std::vector<DenseLayer<T>> layers;

  T squared_norm() const {
    T total = 0;
    for (const auto& layer : layers) {
      total += layer.weight.squaredNorm() + layer.bias.squaredNorm();
    }
    return total;
  }

  bool all_finite() const {
    for (const auto& layer : layers) {
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return true;
  }

  void scale(T factor) {
    for (auto& layer : layers) {
      layer.weight *= factor;
      layer.bias *= factor;
    }
  }

  GradientSet& operator+=(const GradientSet& other) {
    if (other.layers.size() != layers.size()) {
      throw ShapeError("GradientSet: layer count mismatch");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += other.layers[i].weight;
      layers[i].bias += other.layers[i].bias;
    }
    return *this;
  }
};

template <typename T>
struct AdamState {
  std::vector<DenseLayer<T>> first_moment;
  std::vector<DenseLayer<T>> second_moment;
  std::int64_t step = 0;
};

// Activations recorded by a forward pass; layer_inputs[i] feeds layer i and
// layer_inputs.back() is the network output.
template <typename T>
struct ForwardCache {
  std::vector<Matrix<T>> layer_inputs;
};

template <typename T>
class Mlp {
 public:
  Mlp() = default;

  // All parameters zero.
  explicit Mlp(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
    if (layer_sizes_.size() < 2) {
      throw ShapeError("Mlp: need at least input and output sizes");
    }
    for (int size : layer_sizes_) {
      if (size <= 0) throw ShapeError("Mlp: layer sizes must be positive");
    }
    layers_.resize(layer_sizes_.size() - 1);
    for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
      layers_[i].weight = Matrix<T>::Zero(layer_sizes_[i + 1], layer_sizes_[i]);
      layers_[i].bias = Vector<T>::Zero(layer_sizes_[i + 1]);
    }
    reset_optimizer();
  }

  // Uniform fan-in initialisation U(-1/sqrt(in), 1/sqrt(in)) for weights and
  // biases; the final layer is multiplied by output_scale.
  template <typename Generator>
  static Mlp uniform_fan_in(std::vector<int> layer_sizes, Generator& rng, T output_scale = T(1)) {
    Mlp net(std::move(layer_sizes));
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      auto& layer = net.layers_[l];
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      const T scale = (l + 1 == net.layers_.size()) ? output_scale : T(1);
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
          layer.weight(i, j) = static_cast<T>(dist(rng)) * scale;
        }
      }
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        layer.bias(i) = static_cast<T>(dist(rng)) * scale;
      }
    }
    return net;
  }

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }

  std::vector<DenseLayer<T>>& layers() { return layers_; }
  const std::vector<DenseLayer<T>>& layers() const { return layers_; }

  AdamState<T>& optimizer_state() { return adam_; }
  const AdamState<T>& optimizer_state() const { return adam_; }

  void reset_optimizer() {
    adam_.first_moment = zero_like_layers();
    adam_.second_moment = zero_like_layers();
    adam_.step = 0;
  }

  GradientSet<T> zero_gradients() const { return GradientSet<T>{zero_like_layers()}; }

  std::size_t parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += layer.weight.size() + layer.bias.size();
    return count;
  }

  // Flat view used by finite-difference checks: layer by layer, weight
  // (column-major storage order) then bias.
  T& parameter(std::size_t index) {
    for (auto& layer : layers_) {
      const auto w = static_cast<std::size_t>(layer.weight.size());
      if (index < w) return layer.weight.data()[index];
      index -= w;
      const auto b = static_cast<std::size_t>(layer.bias.size());
      if (index < b) return layer.bias.data()[index];
      index -= b;
    }
    throw ShapeError("Mlp::parameter: index out of range");
  }

  Matrix<T> forward(const Matrix<T>& batch) const {
    check_input(batch.cols());
    Matrix<T> activation = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix<T> next = affine(activation, layers_[l]);
      if (l + 1 < layers_.size()) next = next.cwiseMax(T(0));
      activation = std::move(next);
    }
    return activation;
  }

  Vector<T> forward(const Vector<T>& input) const {
    Matrix<T> row = input.transpose();
    return forward(row).row(0).transpose();
  }

  Matrix<T> forward(const Matrix<T>& batch, ForwardCache<T>& cache) const {
    check_input(batch.cols());
    cache.layer_inputs.resize(layers_.size() + 1);
    cache.layer_inputs[0] = batch;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix<T> next = affine(cache.layer_inputs[l], layers_[l]);
      if (l + 1 < layers_.size()) next = next.cwiseMax(T(0));
      cache.layer_inputs[l + 1] = std::move(next);
    }
    return cache.layer_inputs.back();
  }

  // Accumulates d(sum over rows of loss)/d(params) into grads given
  // output_grad = dLoss/dOutput, and returns dLoss/dInput. Callers fold any
  // batch averaging into output_grad.
  Matrix<T> backward(const ForwardCache<T>& cache, const Matrix<T>& output_grad,
                     GradientSet<T>& grads) const {
    if (cache.layer_inputs.size() != layers_.size() + 1) {
      throw ShapeError("Mlp::backward: cache does not belong to this network");
    }
    if (output_grad.cols() != output_size() ||
        output_grad.rows() != cache.layer_inputs.back().rows()) {
      throw ShapeError("Mlp::backward: output gradient shape mismatch");
    }
    if (grads.layers.size() != layers_.size()) grads = zero_gradients();
    Matrix<T> delta = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const Matrix<T>& input = cache.layer_inputs[l];
      grads.layers[l].weight.noalias() += delta.transpose() * input;
      grads.layers[l].bias += delta.colwise().sum().transpose();
      Matrix<T> upstream = delta * layers_[l].weight;
      if (l > 0) {
        // ReLU: input to layer l is the post-activation of layer l-1.
        upstream = (input.array() > T(0)).select(upstream, T(0));
      }
      delta = std::move(upstream);
    }
    return delta;
  }

  // Same backward pass without computing parameter gradients.
  Matrix<T> input_gradient(const ForwardCache<T>& cache, const Matrix<T>& output_grad) const {
    Matrix<T> delta = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      Matrix<T> upstream = delta * layers_[l].weight;
      if (l > 0) {
        upstream = (cache.layer_inputs[l].array() > T(0)).select(upstream, T(0));
      }
      delta = std::move(upstream);
    }
    return delta;
  }

  template <typename U>
  Mlp<U> cast() const {
    Mlp<U> out(layer_sizes_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      out.layers()[l].weight = layers_[l].weight.template cast<U>();
      out.layers()[l].bias = layers_[l].bias.template cast<U>();
    }
    return out;
  }

  bool same_architecture(const Mlp& other) const { return layer_sizes_ == other.layer_sizes_; }

 private:
  static Matrix<T> affine(const Matrix<T>& input, const DenseLayer<T>& layer) {
    Matrix<T> out(input.rows(), layer.weight.rows());
    out.noalias() = input * layer.weight.transpose();
    out.rowwise() += layer.bias.transpose();
    return out;
  }

  void check_input(Eigen::Index cols) const {
    if (layer_sizes_.empty()) throw ShapeError("Mlp: network is empty");
    if (cols != input_size()) {
      throw ShapeError("Mlp::forward: expected input width " + std::to_string(input_size()) +
                       ", got " + std::to_string(cols));
    }
  }

  std::vector<DenseLayer<T>> zero_like_layers() const {
    std::vector<DenseLayer<T>> out(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      out[i].weight = Matrix<T>::Zero(layers_[i].weight.rows(), layers_[i].weight.cols());
      out[i].bias = Vector<T>::Zero(layers_[i].bias.size());
    }
    return out;
  }

  std::vector<int> layer_sizes_;
  std::vector<DenseLayer<T>> layers_;
  AdamState<T> adam_;
};

// Single-sample evaluation.
template <typename T>
Vector<T> forward(const Mlp<T>& net, const std::type_identity_t<Vector<T>>& input) {
  return net.forward(input);
}

// Exact gradient of the batch-mean loss (1/B) sum_i loss_i given the
// per-sample output gradients d loss_i / d output_i (one row per sample).
template <typename T>
GradientSet<T> backward(const Mlp<T>& net, const std::type_identity_t<Matrix<T>>& inputs,
                        const std::type_identity_t<Matrix<T>>& output_grads) {
  if (inputs.rows() != output_grads.rows()) {
    throw ShapeError("backward: input and output-gradient batch sizes differ");
  }
  if (!output_grads.allFinite()) throw NonFiniteError("backward: non-finite upstream gradient");
  ForwardCache<T> cache;
  net.forward(inputs, cache);
  GradientSet<T> grads = net.zero_gradients();
  const T inv_batch = T(1) / static_cast<T>(std::max<Eigen::Index>(inputs.rows(), 1));
  net.backward(cache, output_grads * inv_batch, grads);
  return grads;
}

}  // namespace ccge::nn
