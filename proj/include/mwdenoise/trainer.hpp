#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mwdenoise/dataset.hpp"
#include "mwdenoise/model.hpp"
#include "mwdenoise/optim.hpp"
#include "mwdenoise/rng.hpp"

namespace mwd {

struct TrainConfig {
  double learning_rate = 1.024e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int epochs = 256;
  int batch_size = 8;
  double split_fraction = 0.85;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs between checkpoint callbacks; 0 = final only
};

inline void validate(const TrainConfig& c) {
  if (c.learning_rate < 0) throw ConfigError("train: learning_rate must be >= 0");
  if (!(c.adam_beta1 >= 0 && c.adam_beta1 < 1) ||
      !(c.adam_beta2 >= 0 && c.adam_beta2 < 1))
    throw ConfigError("train: adam betas must lie in [0, 1)");
  if (!(c.adam_epsilon > 0)) throw ConfigError("train: adam_epsilon must be > 0");
  if (c.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (c.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(c.split_fraction > 0 && c.split_fraction < 1))
    throw ConfigError("train: split_fraction must lie in (0, 1)");
  if (c.checkpoint_every < 0)
    throw ConfigError("train: checkpoint_every must be >= 0");
}

struct EpochStats {
  int epoch = 0;            // 1-based
  double train_loss = 0.0;  // sample-weighted mean over the epoch's batches
  double test_loss = std::numeric_limits<double>::quiet_NaN();  // NaN if no test set
};

/// Called after every epoch; `is_checkpoint` marks the checkpoint cadence
/// (and is always set on the final epoch).
using EpochCallback = std::function<void(const ModelParams<float>& model,
                                         const EpochStats& stats,
                                         bool is_checkpoint)>;

namespace detail {

inline void check_uniform_dims(const PairedDataset& ds, const char* which) {
  for (std::size_t i = 1; i < ds.pairs.size(); ++i)
    if (!ds.pairs[i].noisy.same_dims(ds.pairs[0].noisy))
      throw DataError(std::string("train: ") + which +
                      " images must share dims; pair " + std::to_string(i) +
                      " differs");
}

inline Tensor<float> stack_batch(const PairedDataset& ds,
                                 const std::vector<std::size_t>& idx,
                                 std::size_t begin, std::size_t end,
                                 bool noisy_side) {
  const Image& first = ds.pairs[idx[begin]].noisy;
  Tensor<float> t(Shape{int(end - begin), 1, first.height, first.width});
  const std::int64_t plane = std::int64_t(first.height) * first.width;
  for (std::size_t i = begin; i < end; ++i) {
    const ImagePair& p = ds.pairs[idx[i]];
    const Image& img = noisy_side ? p.noisy : p.clean;
    std::copy(img.pixels.begin(), img.pixels.end(),
              t.data.begin() + std::int64_t(i - begin) * plane);
  }
  return t;
}

/// Mean over the dataset of the per-sample squared-error sum, computed in
/// inference batches. Mirrors mse_loss's convention.
inline double evaluation_loss(const ModelParams<float>& model,
                              const PairedDataset& ds, int batch_size) {
  if (ds.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  double total = 0.0;
  for (std::size_t b = 0; b < ds.size(); b += std::size_t(batch_size)) {
    const std::size_t e = std::min(ds.size(), b + std::size_t(batch_size));
    const Tensor<float> x = stack_batch(ds, idx, b, e, true);
    const Tensor<float> y = stack_batch(ds, idx, b, e, false);
    const Tensor<float> out = forward(model, x);
    const MseResult<float> r = mse_loss(out, y);
    total += double(r.loss) * double(e - b);
  }
  return total / double(ds.size());
}

}  // namespace detail

struct TrainResult {
  std::vector<EpochStats> log;
  SplitResult parts;  // the split actually used, for held-out evaluation
};

/// Supervised loop: split, then epochs of shuffled mini-batches of
/// forward -> MSE -> backward -> Adam. Deterministic from (dataset, config)
/// under the single-thread contract. Expects normalized images.
inline TrainResult train(ModelParams<float>& model, const PairedDataset& dataset,
                         const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  validate(cfg);
  validate(model.config);
  validate(dataset);
  detail::check_uniform_dims(dataset, "dataset");

  TrainResult result;
  result.parts = split(dataset, cfg.split_fraction, mix_seed(cfg.seed, 1));
  const SplitResult& parts = result.parts;
  if (parts.train.empty())
    throw DataError("train: split produced an empty training set");

  AdamParams ap;
  ap.learning_rate = cfg.learning_rate;
  ap.beta1 = cfg.adam_beta1;
  ap.beta2 = cfg.adam_beta2;
  ap.epsilon = cfg.adam_epsilon;
  AdamState<float> adam(ap, model);

  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 2));
  std::vector<std::size_t> order(parts.train.size());
  std::iota(order.begin(), order.end(), std::size_t(0));

  std::vector<EpochStats>& log = result.log;
  log.reserve(size_t(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += std::size_t(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + std::size_t(cfg.batch_size));
      const Tensor<float> x = detail::stack_batch(parts.train, order, b, e, true);
      const Tensor<float> y = detail::stack_batch(parts.train, order, b, e, false);

      Trace<float> trace;
      const Tensor<float> out = forward_traced(model, x, &trace);
      const MseResult<float> r = mse_loss(out, y);
      if (!std::isfinite(double(r.loss)))
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      epoch_loss += double(r.loss) * double(e - b);

      const ModelGrads<float> grads = backward(model, trace, r.grad_pred);
      adam_step(adam, model, grads);
      ++batch_index;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / double(parts.train.size());
    stats.test_loss = detail::evaluation_loss(model, parts.test, cfg.batch_size);
    log.push_back(stats);

    if (on_epoch) {
      const bool cadence = cfg.checkpoint_every > 0 &&
                           epoch % cfg.checkpoint_every == 0;
      on_epoch(model, stats, cadence || epoch == cfg.epochs);
    }
  }
  return result;
}

/// epoch,mean_train_loss,mean_test_loss — an empty test split prints "nan".
inline void write_loss_csv(std::ostream& out, const std::vector<EpochStats>& log) {
  out << "epoch,mean_train_loss,mean_test_loss\n";
  out.precision(9);
  for (const auto& s : log) {
    out << s.epoch << ',' << s.train_loss << ',';
    if (std::isnan(s.test_loss))
      out << "nan";
    else
      out << s.test_loss;
    out << '\n';
  }
  if (!out) throw DataError("loss csv: write failed");
}

}  // namespace mwd
