#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mwdenoise/model.hpp"

namespace mwd {

struct CheckResult {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace gradcheck_detail {

// Inputs are O(1) here, so a unit floor keeps zero-gradient coordinates from
// producing spurious relative errors.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

constexpr double kStep = 1e-5;

inline Tensor<double> random_tensor(Shape s, std::mt19937_64& rng,
                                    double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(s);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

// Pushes values away from 0 so the ReLU kink never sits inside an FD stencil.
inline void avoid_zero(Tensor<double>& t, double margin = 0.05) {
  for (auto& v : t.data) v += v >= 0 ? margin : -margin;
}

/// Compares analytic gradients against central finite differences of `loss`
/// for every coordinate in `coords`, folding into one named result.
struct Harness {
  std::function<double()> loss;
  CheckResult result;

  explicit Harness(std::string name, double tolerance,
                   std::function<double()> loss_fn)
      : loss(std::move(loss_fn)) {
    result.name = std::move(name);
    result.tolerance = tolerance;
  }

  void check_span(double* data, const double* analytic, std::int64_t count) {
    for (std::int64_t i = 0; i < count; ++i) {
      const double orig = data[i];
      data[i] = orig + kStep;
      const double lp = loss();
      data[i] = orig - kStep;
      const double lm = loss();
      data[i] = orig;
      const double fd = (lp - lm) / (2.0 * kStep);
      const double e = rel_err(analytic[i], fd);
      if (e > result.max_rel_err) result.max_rel_err = e;
    }
  }

  CheckResult finish() {
    result.pass = result.max_rel_err < result.tolerance;
    return result;
  }
};

}  // namespace gradcheck_detail

/// Each per-op check probes loss = sum(probe ⊙ op(inputs)) so the analytic
/// gradient is just the op's backward applied to the probe tensor.

inline CheckResult check_conv_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> x = random_tensor(Shape{2, 3, 5, 4}, rng);
  ConvLayer<double> layer(4, 3);
  {
    Tensor<double> w = random_tensor(layer.weights.shape, rng);
    layer.weights = w;
    Tensor<double> b = random_tensor(Shape{1, 1, 1, int(layer.bias.size())}, rng);
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = b.data[i];
  }
  const Tensor<double> probe = random_tensor(Shape{2, 4, 5, 4}, rng);

  Harness h("conv2d", tol, [&] {
    const Tensor<double> out = conv2d_forward(x, layer);
    double acc = 0.0;
    for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
    return acc;
  });
  const ConvGrads<double> g = conv2d_backward(x, layer, probe);
  h.check_span(x.data.data(), g.input.data.data(), x.numel());
  h.check_span(layer.weights.data.data(), g.weights.data.data(),
               layer.weights.numel());
  h.check_span(layer.bias.data(), g.bias.data(), std::int64_t(layer.bias.size()));
  return h.finish();
}

inline CheckResult check_relu_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> x = random_tensor(Shape{2, 2, 4, 4}, rng);
  avoid_zero(x);
  const Tensor<double> probe = random_tensor(x.shape, rng);

  Harness h("relu", tol, [&] {
    const Tensor<double> out = relu_forward(x);
    double acc = 0.0;
    for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
    return acc;
  });
  const Tensor<double> g = relu_backward(x, probe);
  h.check_span(x.data.data(), g.data.data(), x.numel());
  return h.finish();
}

inline CheckResult check_add_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> a = random_tensor(Shape{2, 3, 4, 2}, rng);
  Tensor<double> b = random_tensor(a.shape, rng);
  const Tensor<double> probe = random_tensor(a.shape, rng);

  Harness h("add", tol, [&] {
    const Tensor<double> out = add_forward(a, b);
    double acc = 0.0;
    for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
    return acc;
  });
  // add passes the gradient to both branches unchanged
  h.check_span(a.data.data(), probe.data.data(), a.numel());
  h.check_span(b.data.data(), probe.data.data(), b.numel());
  return h.finish();
}

inline CheckResult check_mse_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> pred = random_tensor(Shape{3, 2, 4, 4}, rng);
  const Tensor<double> target = random_tensor(pred.shape, rng);

  Harness h("mse", tol, [&] { return mse_loss(pred, target).loss; });
  const MseResult<double> r = mse_loss(pred, target);
  h.check_span(pred.data.data(), r.grad_pred.data.data(), pred.numel());
  return h.finish();
}

inline CheckResult check_dwt_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> x = random_tensor(Shape{2, 3, 4, 6}, rng);
  const Tensor<double> probe = random_tensor(Shape{2, 12, 2, 3}, rng);

  Harness h("dwt", tol, [&] {
    const Tensor<double> out = dwt_forward(x);
    double acc = 0.0;
    for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
    return acc;
  });
  const Tensor<double> g = dwt_backward(probe);
  h.check_span(x.data.data(), g.data.data(), x.numel());
  return h.finish();
}

inline CheckResult check_iwt_gradients(std::uint64_t seed, double tol = 1e-6) {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  Tensor<double> x = random_tensor(Shape{2, 8, 3, 2}, rng);
  const Tensor<double> probe = random_tensor(Shape{2, 2, 6, 4}, rng);

  Harness h("iwt", tol, [&] {
    const Tensor<double> out = iwt_forward(x);
    double acc = 0.0;
    for (std::int64_t i = 0; i < out.numel(); ++i) acc += out.data[i] * probe.data[i];
    return acc;
  });
  const Tensor<double> g = iwt_backward(probe);
  h.check_span(x.data.data(), g.data.data(), x.numel());
  return h.finish();
}

/// End-to-end: loss = mse(forward(model, x), target); finite differences over
/// every parameter and every input pixel.
inline CheckResult check_model_gradients(const ModelConfig& cfg, int h, int w,
                                         std::uint64_t seed, double tol = 1e-5,
                                         const std::string& name = "model") {
  using namespace gradcheck_detail;
  std::mt19937_64 rng(seed);
  ModelParams<double> model = build_model<double>(cfg, seed);
  // biases start at zero; jitter them so their gradients are exercised off
  // the trivial point
  std::uniform_real_distribution<double> bias_dist(-0.05, 0.05);
  for (auto& layer : model.layers)
    for (auto& b : layer.bias) b = bias_dist(rng);

  Tensor<double> x = random_tensor(Shape{1, cfg.input_channels, h, w}, rng, 0.0, 1.0);
  const Tensor<double> target =
      random_tensor(Shape{1, cfg.input_channels, h, w}, rng, 0.0, 1.0);

  Harness harness(name, tol, [&] {
    return mse_loss(forward(model, x), target).loss;
  });

  Trace<double> trace;
  const Tensor<double> out = forward_traced(model, x, &trace);
  const MseResult<double> r = mse_loss(out, target);
  const ModelGrads<double> grads = backward(model, trace, r.grad_pred);

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    harness.check_span(model.layers[i].weights.data.data(),
                       grads.layers[i].weights.data.data(),
                       model.layers[i].weights.numel());
    harness.check_span(model.layers[i].bias.data(), grads.layers[i].bias.data(),
                       std::int64_t(model.layers[i].bias.size()));
  }
  harness.check_span(x.data.data(), grads.input.data.data(), x.numel());
  return harness.finish();
}

/// The full battery: the six ops at 1e-6 and two tiny end-to-end models (one
/// single-level residual, one two-level with a live skip path) at 1e-5.
inline std::vector<CheckResult> run_gradient_checks(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(check_conv_gradients(seed));
  results.push_back(check_relu_gradients(seed + 1));
  results.push_back(check_add_gradients(seed + 2));
  results.push_back(check_mse_gradients(seed + 3));
  results.push_back(check_dwt_gradients(seed + 4));
  results.push_back(check_iwt_gradients(seed + 5));

  ModelConfig tiny1;
  tiny1.levels = 1;
  tiny1.convs_per_block = 1;
  tiny1.channel_schedule = {4};
  tiny1.residual_mode = true;
  results.push_back(
      check_model_gradients(tiny1, 4, 4, seed + 6, 1e-5, "model-l1-residual"));

  ModelConfig tiny2;
  tiny2.levels = 2;
  tiny2.convs_per_block = 1;
  tiny2.channel_schedule = {2, 2};
  tiny2.residual_mode = false;
  results.push_back(
      check_model_gradients(tiny2, 8, 8, seed + 7, 1e-5, "model-l2-skip"));
  return results;
}

}  // namespace mwd
