#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mwdenoise/model.hpp"

namespace mwd {

struct AdamParams {
  double learning_rate = 1.024e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline void validate(const AdamParams& p) {
  if (!(p.learning_rate >= 0))  // 0 allowed: makes the step a deterministic no-op
    throw ConfigError("adam: learning_rate must be >= 0");
  if (!(p.beta1 >= 0 && p.beta1 < 1) || !(p.beta2 >= 0 && p.beta2 < 1))
    throw ConfigError("adam: betas must lie in [0, 1)");
  if (!(p.epsilon > 0)) throw ConfigError("adam: epsilon must be > 0");
}

/// One Adam update for a flat span of parameters. `t` is the 1-based step
/// count used for bias correction; epsilon sits outside the square root:
///   m <- b1 m + (1-b1) g        mhat = m / (1 - b1^t)
///   v <- b2 v + (1-b2) g^2      vhat = v / (1 - b2^t)
///   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
/// Moments are kept in double regardless of the parameter type.
template <typename T>
void adam_update(const AdamParams& p, std::int64_t t, T* theta, const T* grad,
                 double* m, double* v, std::int64_t count) {
  if (t < 1) throw ConfigError("adam: step index must be >= 1");
  const double bc1 = 1.0 - std::pow(p.beta1, double(t));
  const double bc2 = 1.0 - std::pow(p.beta2, double(t));
  for (std::int64_t i = 0; i < count; ++i) {
    const double g = double(grad[i]);
    m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g;
    v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    theta[i] = T(double(theta[i]) - p.learning_rate * mhat / (std::sqrt(vhat) + p.epsilon));
  }
}

/// Moment buffers for a whole model, one pair of vectors per conv layer
/// (weights then bias), plus the shared step counter.
template <typename T>
struct AdamState {
  AdamParams params;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;

  explicit AdamState(const AdamParams& p, const ModelParams<T>& model)
      : params(p) {
    validate(p);
    for (const auto& layer : model.layers) {
      m_weights.emplace_back(size_t(layer.weights.numel()), 0.0);
      v_weights.emplace_back(size_t(layer.weights.numel()), 0.0);
      m_bias.emplace_back(layer.bias.size(), 0.0);
      v_bias.emplace_back(layer.bias.size(), 0.0);
    }
  }
};

template <typename T>
void adam_step(AdamState<T>& state, ModelParams<T>& model,
               const ModelGrads<T>& grads) {
  if (grads.layers.size() != model.layers.size())
    throw ConfigError("adam: gradient layer count " +
                      std::to_string(grads.layers.size()) +
                      " does not match model (" +
                      std::to_string(model.layers.size()) + ")");
  ++state.step;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    auto& layer = model.layers[i];
    const auto& g = grads.layers[i];
    require_same_shape(layer.weights.shape, g.weights.shape, "adam weights");
    if (g.bias.size() != layer.bias.size())
      throw ShapeError("adam: bias gradient size mismatch in layer " +
                       std::to_string(i));
    adam_update(state.params, state.step, layer.weights.data.data(),
                g.weights.data.data(), state.m_weights[i].data(),
                state.v_weights[i].data(), layer.weights.numel());
    adam_update(state.params, state.step, layer.bias.data(), g.bias.data(),
                state.m_bias[i].data(), state.v_bias[i].data(),
                std::int64_t(layer.bias.size()));
  }
}

}  // namespace mwd
