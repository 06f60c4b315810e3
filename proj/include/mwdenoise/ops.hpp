#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "mwdenoise/parallel.hpp"
#include "mwdenoise/tensor.hpp"

namespace mwd {

/// One convolution layer: 3x3 kernels, stride 1, zero padding 1, per-channel
/// bias. Convolution is implemented as cross-correlation (no kernel flip);
/// learned weights absorb the orientation. Also reused as the gradient
/// carrier, since gradients mirror the parameter shapes.
template <typename T>
struct ConvLayer {
  Tensor<T> weights;    // (c_out, c_in, 3, 3)
  std::vector<T> bias;  // c_out

  ConvLayer() = default;
  ConvLayer(int c_out, int c_in)
      : weights(Shape{c_out, c_in, 3, 3}), bias(size_t(c_out), T(0)) {}

  int out_channels() const { return weights.shape.n; }
  int in_channels() const { return weights.shape.c; }
  std::int64_t parameter_count() const {
    return weights.numel() + std::int64_t(bias.size());
  }

  template <typename U>
  ConvLayer<U> cast() const {
    ConvLayer<U> out;
    out.weights = weights.template cast<U>();
    out.bias.assign(bias.begin(), bias.end());
    return out;
  }
};

namespace detail {

template <typename T>
void check_conv_shapes(const Shape& in, const ConvLayer<T>& layer) {
  const Shape& ws = layer.weights.shape;
  if (ws.h != 3 || ws.w != 3)
    throw ShapeError("conv2d: kernel must be 3x3, got " + ws.str());
  if (ws.c != in.c)
    throw ShapeError("conv2d: input has " + std::to_string(in.c) +
                     " channels but weights expect " + std::to_string(ws.c));
  if (int(layer.bias.size()) != ws.n)
    throw ShapeError("conv2d: bias length " + std::to_string(layer.bias.size()) +
                     " does not match " + std::to_string(ws.n) +
                     " output channels");
  if (in.h < 1 || in.w < 1)
    throw ShapeError("conv2d: empty spatial dims " + in.str());
}

}  // namespace detail

/// Same-size 3x3 cross-correlation with zero padding and per-channel bias.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer) {
  detail::check_conv_shapes(input.shape, layer);
  const int n = input.shape.n, ci = input.shape.c;
  const int h = input.shape.h, w = input.shape.w;
  const int co = layer.out_channels();
  Tensor<T> out(Shape{n, co, h, w});

  parallel_for(std::int64_t(n) * co, [&](std::int64_t task) {
    const int b = int(task / co);
    const int oc = int(task % co);
    T* dst = out.plane(b, oc);
    std::fill(dst, dst + std::int64_t(h) * w, layer.bias[oc]);
    for (int ic = 0; ic < ci; ++ic) {
      const T* src = input.plane(b, ic);
      const T* k = layer.weights.plane(oc, ic);
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const T wv = k[ky * 3 + kx];
          const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int y = y0; y < y1; ++y) {
            const T* srow = src + std::int64_t(y + dy) * w + dx;
            T* drow = dst + std::int64_t(y) * w;
            for (int x = x0; x < x1; ++x) drow[x] += wv * srow[x];
          }
        }
      }
    }
  });
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weights;
  std::vector<T> bias;
};

/// Analytic gradients of conv2d_forward. Reductions over the batch run in a
/// fixed order, so results are bit-identical for any thread count.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                             const Tensor<T>& grad_out) {
  detail::check_conv_shapes(input.shape, layer);
  const int n = input.shape.n, ci = input.shape.c;
  const int h = input.shape.h, w = input.shape.w;
  const int co = layer.out_channels();
  require_same_shape(grad_out.shape, Shape{n, co, h, w}, "conv2d_backward");

  ConvGrads<T> g;
  g.input = Tensor<T>(input.shape);
  g.weights = Tensor<T>(layer.weights.shape);
  g.bias.assign(size_t(co), T(0));

  // d/d(input): every output pixel (y, x) of channel oc received
  // wv * input(y+dy, x+dx), so input(iy, ix) collects wv * grad_out(iy-dy, ix-dx).
  parallel_for(std::int64_t(n) * ci, [&](std::int64_t task) {
    const int b = int(task / ci);
    const int ic = int(task % ci);
    T* dst = g.input.plane(b, ic);
    for (int oc = 0; oc < co; ++oc) {
      const T* gsrc = grad_out.plane(b, oc);
      const T* k = layer.weights.plane(oc, ic);
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const T wv = k[ky * 3 + kx];
          const int y0 = std::max(0, dy), y1 = std::min(h, h + dy);
          const int x0 = std::max(0, dx), x1 = std::min(w, w + dx);
          for (int iy = y0; iy < y1; ++iy) {
            const T* grow = gsrc + std::int64_t(iy - dy) * w - dx;
            T* drow = dst + std::int64_t(iy) * w;
            for (int ix = x0; ix < x1; ++ix) drow[ix] += wv * grow[ix];
          }
        }
      }
    }
  });

  // d/d(weights) and d/d(bias), accumulated in double for float tensors.
  parallel_for(std::int64_t(co), [&](std::int64_t task) {
    const int oc = int(task);
    for (int ic = 0; ic < ci; ++ic) {
      T* kg = g.weights.plane(oc, ic);
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          double acc = 0.0;
          const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int b = 0; b < n; ++b) {
            const T* gsrc = grad_out.plane(b, oc);
            const T* src = input.plane(b, ic);
            for (int y = y0; y < y1; ++y) {
              const T* grow = gsrc + std::int64_t(y) * w;
              const T* srow = src + std::int64_t(y + dy) * w + dx;
              for (int x = x0; x < x1; ++x) acc += double(grow[x]) * double(srow[x]);
            }
          }
          kg[ky * 3 + kx] = T(acc);
        }
      }
    }
    double bias_acc = 0.0;
    for (int b = 0; b < n; ++b) {
      const T* gsrc = grad_out.plane(b, oc);
      for (std::int64_t i = 0; i < std::int64_t(h) * w; ++i) bias_acc += double(gsrc[i]);
    }
    g.bias[oc] = T(bias_acc);
  });
  return g;
}

/// Elementwise max(x, 0).
template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape);
  for (std::int64_t i = 0; i < input.numel(); ++i)
    out.data[i] = input.data[i] > T(0) ? input.data[i] : T(0);
  return out;
}

/// Passes gradient where input > 0. The subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  require_same_shape(input.shape, grad_out.shape, "relu_backward");
  Tensor<T> out(input.shape);
  for (std::int64_t i = 0; i < input.numel(); ++i)
    out.data[i] = input.data[i] > T(0) ? grad_out.data[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> add_forward(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape, b.shape, "add");
  Tensor<T> out(a.shape);
  for (std::int64_t i = 0; i < a.numel(); ++i)
    out.data[i] = a.data[i] + b.data[i];
  return out;
}

template <typename T>
struct MseResult {
  T loss;
  Tensor<T> grad_pred;
};

/// Mean over the batch of per-sample squared-error sums:
/// loss = (1/N) * sum_i ||target_i - pred_i||^2, grad = 2 (pred - target) / N.
template <typename T>
MseResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape(pred.shape, target.shape, "mse_loss");
  if (pred.shape.n < 1) throw ShapeError("mse_loss: empty batch");
  const double inv_n = 1.0 / double(pred.shape.n);
  MseResult<T> r;
  r.grad_pred = Tensor<T>(pred.shape);
  double acc = 0.0;
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    const double d = double(pred.data[i]) - double(target.data[i]);
    acc += d * d;
    r.grad_pred.data[i] = T(2.0 * d * inv_n);
  }
  r.loss = T(acc * inv_n);
  return r;
}

}  // namespace mwd
