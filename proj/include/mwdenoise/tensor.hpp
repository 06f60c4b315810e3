#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mwdenoise/errors.hpp"

namespace mwd {

/// (batch, channels, height, width) of a dense NCHW tensor.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::int64_t numel() const {
    return std::int64_t(n) * c * h * w;
  }

  bool operator==(const Shape&) const = default;

  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
           std::to_string(h) + ", " + std::to_string(w) + ")";
  }
};

/// Dense row-major NCHW tensor. T is float for training/inference and
/// double for gradient-check mode.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;

  // Validates before the data vector is sized; a negative numel would
  // otherwise wrap around to a huge allocation.
  static std::size_t checked_numel(const Shape& s) {
    if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1)
      throw ShapeError("tensor shape has non-positive dimension " + s.str());
    return std::size_t(s.numel());
  }

  explicit Tensor(Shape s) : shape(s), data(checked_numel(s), T(0)) {}

  Tensor(Shape s, std::vector<T> values) : shape(s), data(std::move(values)) {
    if (data.size() != checked_numel(s))
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + s.str());
  }

  std::int64_t numel() const { return shape.numel(); }

  T& at(int n, int c, int y, int x) {
    return data[((std::int64_t(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }
  const T& at(int n, int c, int y, int x) const {
    return data[((std::int64_t(n) * shape.c + c) * shape.h + y) * shape.w + x];
  }

  /// Pointer to the start of one (batch, channel) plane of h*w scalars.
  T* plane(int n, int c) {
    return data.data() + (std::int64_t(n) * shape.c + c) * shape.h * shape.w;
  }
  const T* plane(int n, int c) const {
    return data.data() + (std::int64_t(n) * shape.c + c) * shape.h * shape.w;
  }

  bool all_finite() const {
    for (const T v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

inline void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " +
                     b.str());
}

}  // namespace mwd
