#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mwdenoise/image.hpp"

namespace mwd {

struct ImagePair {
  Image noisy;
  Image clean;  // ground truth
  std::string preset_label;
};

struct PairedDataset {
  std::vector<ImagePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

inline void validate(const PairedDataset& ds) {
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    const auto& p = ds.pairs[i];
    if (!p.noisy.same_dims(p.clean))
      throw DataError("dataset: pair " + std::to_string(i) + " dims differ");
    for (float v : p.noisy.pixels)
      if (!std::isfinite(v))
        throw DataError("dataset: non-finite pixel in noisy image of pair " +
                        std::to_string(i));
    for (float v : p.clean.pixels)
      if (!std::isfinite(v))
        throw DataError("dataset: non-finite pixel in clean image of pair " +
                        std::to_string(i));
  }
}

/// Min-max normalization to [0,1] per image; a constant image maps to all
/// zeros rather than dividing by zero.
inline Image normalize(const Image& img) {
  Image out = img;
  if (img.pixels.empty()) return out;
  const auto [mn_it, mx_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const float mn = *mn_it, mx = *mx_it;
  if (mx == mn) {
    std::fill(out.pixels.begin(), out.pixels.end(), 0.0f);
    return out;
  }
  const double scale = 1.0 / (double(mx) - double(mn));
  for (float& v : out.pixels) v = float((double(v) - double(mn)) * scale);
  return out;
}

/// Both sides of every pair normalized by their own min/max, which is what
/// training and evaluation expect.
inline PairedDataset normalized(const PairedDataset& ds) {
  PairedDataset out;
  out.pairs.reserve(ds.pairs.size());
  for (const auto& p : ds.pairs)
    out.pairs.push_back({normalize(p.noisy), normalize(p.clean), p.preset_label});
  return out;
}

struct SplitResult {
  PairedDataset train;
  PairedDataset test;
  bool test_empty = false;  // warning flag: all pairs landed in train
};

/// Seeded shuffle, then the first round(fraction * N) pairs become the
/// training set. The two halves partition the input exactly.
inline SplitResult split(const PairedDataset& ds, double fraction,
                         std::uint64_t seed) {
  if (ds.empty()) throw DataError("split: dataset is empty");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  const std::size_t n_train = std::min<std::size_t>(
      ds.size(), std::size_t(std::llround(fraction * double(ds.size()))));
  SplitResult r;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto& dst = i < n_train ? r.train : r.test;
    dst.pairs.push_back(ds.pairs[idx[i]]);
  }
  r.test_empty = r.test.empty();
  return r;
}

}  // namespace mwd
