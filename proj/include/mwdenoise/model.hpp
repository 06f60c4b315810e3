#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mwdenoise/ops.hpp"
#include "mwdenoise/tensor.hpp"
#include "mwdenoise/wavelet.hpp"

namespace mwd {

/// Network layout. Each scale level contracts with a DWT and expands with an
/// IWT; convolutions do all the learning in between.
struct ModelConfig {
  int levels = 3;
  int convs_per_block = 3;
  int input_channels = 1;
  bool residual_mode = false;
  std::vector<int> channel_schedule = {64, 256, 1024};  // width per level

  int layer_count() const { return 2 * levels * convs_per_block; }
};

inline void validate(const ModelConfig& cfg) {
  if (cfg.levels < 1)
    throw ConfigError("model: levels must be >= 1, got " + std::to_string(cfg.levels));
  if (cfg.convs_per_block < 1)
    throw ConfigError("model: convs_per_block must be >= 1, got " +
                      std::to_string(cfg.convs_per_block));
  if (cfg.input_channels < 1)
    throw ConfigError("model: input_channels must be >= 1, got " +
                      std::to_string(cfg.input_channels));
  if (int(cfg.channel_schedule.size()) != cfg.levels)
    throw ConfigError("model: channel_schedule has " +
                      std::to_string(cfg.channel_schedule.size()) +
                      " entries but levels is " + std::to_string(cfg.levels));
  for (int w : cfg.channel_schedule)
    if (w < 1)
      throw ConfigError("model: channel_schedule entries must be >= 1, got " +
                        std::to_string(w));
  for (int w : cfg.channel_schedule)
    if (w > cfg.channel_schedule.back())
      throw ConfigError(
          "model: deepest level must carry the widest schedule entry");
}

namespace detail {

// Width of the feature map entering the DWT at `level` (and leaving the IWT).
inline int pre_dwt_width(const ModelConfig& cfg, int level) {
  return level == 0 ? cfg.input_channels : cfg.channel_schedule[level - 1];
}

inline int contract_layer_index(const ModelConfig& cfg, int level, int j) {
  return level * cfg.convs_per_block + j;
}

// Expanding blocks run from the deepest level back up, stored in that order.
inline int expand_layer_index(const ModelConfig& cfg, int level, int j) {
  return cfg.levels * cfg.convs_per_block +
         (cfg.levels - 1 - level) * cfg.convs_per_block + j;
}

}  // namespace detail

/// (c_in, c_out) per conv layer, in execution order: contracting blocks from
/// the top level down, then expanding blocks from the bottom back up.
inline std::vector<std::pair<int, int>> layer_plan(const ModelConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<int, int>> plan(size_t(cfg.layer_count()));
  for (int l = 0; l < cfg.levels; ++l) {
    const int width = cfg.channel_schedule[l];
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      const int c_in = j == 0 ? 4 * detail::pre_dwt_width(cfg, l) : width;
      plan[size_t(detail::contract_layer_index(cfg, l, j))] = {c_in, width};
    }
  }
  for (int l = cfg.levels - 1; l >= 0; --l) {
    const int width = cfg.channel_schedule[l];
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      const int c_out = j == cfg.convs_per_block - 1
                            ? 4 * detail::pre_dwt_width(cfg, l)
                            : width;
      plan[size_t(detail::expand_layer_index(cfg, l, j))] = {width, c_out};
    }
  }
  return plan;
}

template <typename T>
struct ModelParams {
  ModelConfig config;
  std::vector<ConvLayer<T>> layers;  // layer_plan order

  std::int64_t parameter_count() const {
    std::int64_t total = 0;
    for (const auto& l : layers) total += l.parameter_count();
    return total;
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.config = config;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) out.layers.push_back(l.template cast<U>());
    return out;
  }
};

/// He-style init: weights ~ N(0, 2 / fan_in), biases zero.
template <typename T>
ModelParams<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams<T> m;
  m.config = cfg;
  std::mt19937_64 rng(seed);
  for (const auto& [c_in, c_out] : layer_plan(cfg)) {
    ConvLayer<T> layer(c_out, c_in);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (9.0 * c_in)));
    for (auto& w : layer.weights.data) w = T(dist(rng));
    m.layers.push_back(std::move(layer));
  }
  return m;
}

namespace detail {

inline void check_model_input(const ModelConfig& cfg, const Shape& s) {
  if (s.c != cfg.input_channels)
    throw ShapeError("model: input has " + std::to_string(s.c) +
                     " channels, config expects " +
                     std::to_string(cfg.input_channels));
  const int factor = 1 << cfg.levels;
  if (s.h % factor != 0 || s.w % factor != 0 || s.h < factor || s.w < factor)
    throw ShapeError("model: spatial dims of " + s.str() +
                     " must be positive multiples of " + std::to_string(factor));
}

}  // namespace detail

/// Stored activations from a traced forward pass, enough for backward():
/// per conv layer its input and its pre-activation output.
template <typename T>
struct Trace {
  std::vector<Tensor<T>> conv_in;
  std::vector<Tensor<T>> conv_out;
};

template <typename T>
Tensor<T> forward_traced(const ModelParams<T>& params, const Tensor<T>& input,
                         Trace<T>* trace) {
  const ModelConfig& cfg = params.config;
  validate(cfg);
  detail::check_model_input(cfg, input.shape);
  if (int(params.layers.size()) != cfg.layer_count())
    throw ConfigError("model: expected " + std::to_string(cfg.layer_count()) +
                      " layers, have " + std::to_string(params.layers.size()));
  if (trace) {
    trace->conv_in.assign(size_t(cfg.layer_count()), Tensor<T>());
    trace->conv_out.assign(size_t(cfg.layer_count()), Tensor<T>());
  }

  auto run_conv = [&](Tensor<T>&& x, int idx, bool relu) {
    Tensor<T> pre = conv2d_forward(x, params.layers[size_t(idx)]);
    if (trace) {
      trace->conv_in[size_t(idx)] = std::move(x);
      trace->conv_out[size_t(idx)] = pre;
    }
    return relu ? relu_forward(pre) : std::move(pre);
  };

  std::vector<Tensor<T>> skips;  // feature entering the DWT at each level
  Tensor<T> cur = input;
  for (int l = 0; l < cfg.levels; ++l) {
    skips.push_back(cur);
    cur = dwt_forward(cur);
    for (int j = 0; j < cfg.convs_per_block; ++j)
      cur = run_conv(std::move(cur), detail::contract_layer_index(cfg, l, j), true);
  }
  for (int l = cfg.levels - 1; l >= 0; --l) {
    for (int j = 0; j < cfg.convs_per_block; ++j) {
      const bool last_of_net = l == 0 && j == cfg.convs_per_block - 1;
      cur = run_conv(std::move(cur), detail::expand_layer_index(cfg, l, j),
                     !last_of_net);
    }
    cur = iwt_forward(cur);
    if (l > 0) cur = add_forward(cur, skips[size_t(l)]);
  }
  if (cfg.residual_mode) cur = add_forward(cur, input);
  return cur;
}

template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const Tensor<T>& input) {
  return forward_traced(params, input, static_cast<Trace<T>*>(nullptr));
}

template <typename T>
struct ModelGrads {
  std::vector<ConvLayer<T>> layers;  // same shapes as the parameters
  Tensor<T> input;
};

/// Reverse-mode gradients through the whole network. Walks the expanding path
/// backwards first (collecting the gradient that each skip connection feeds
/// back), then the contracting path.
template <typename T>
ModelGrads<T> backward(const ModelParams<T>& params, const Trace<T>& trace,
                       const Tensor<T>& grad_out) {
  const ModelConfig& cfg = params.config;
  if (int(trace.conv_in.size()) != cfg.layer_count() ||
      int(trace.conv_out.size()) != cfg.layer_count())
    throw ConfigError("model backward: trace does not match config");

  ModelGrads<T> grads;
  grads.layers.resize(size_t(cfg.layer_count()));

  auto back_conv = [&](Tensor<T>&& g, int idx, bool relu) {
    if (relu) g = relu_backward(trace.conv_out[size_t(idx)], g);
    ConvGrads<T> cg =
        conv2d_backward(trace.conv_in[size_t(idx)], params.layers[size_t(idx)], g);
    grads.layers[size_t(idx)].weights = std::move(cg.weights);
    grads.layers[size_t(idx)].bias = std::move(cg.bias);
    return std::move(cg.input);
  };

  std::vector<Tensor<T>> skip_grads(size_t(cfg.levels));
  Tensor<T> g = grad_out;
  for (int l = 0; l < cfg.levels; ++l) {
    if (l > 0) skip_grads[size_t(l)] = g;
    g = iwt_backward(g);
    for (int j = cfg.convs_per_block - 1; j >= 0; --j) {
      const bool last_of_net = l == 0 && j == cfg.convs_per_block - 1;
      g = back_conv(std::move(g), detail::expand_layer_index(cfg, l, j),
                    !last_of_net);
    }
  }
  for (int l = cfg.levels - 1; l >= 0; --l) {
    for (int j = cfg.convs_per_block - 1; j >= 0; --j)
      g = back_conv(std::move(g), detail::contract_layer_index(cfg, l, j), true);
    g = dwt_backward(g);
    if (l > 0) g = add_forward(g, skip_grads[size_t(l)]);
  }
  if (cfg.residual_mode) g = add_forward(g, grad_out);
  grads.input = std::move(g);
  return grads;
}

}  // namespace mwd
