#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwdenoise/errors.hpp"
#include "mwdenoise/tensor.hpp"

namespace mwd {

/// A single 2D frame with physical pixel spacing. Row-major, row 0 at the
/// top (shallowest depth).
struct Image {
  int height = 0;
  int width = 0;
  float pixel_spacing_mm = 1.0f;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, float spacing_mm)
      : height(h), width(w), pixel_spacing_mm(spacing_mm) {
    if (h < 1 || w < 1)
      throw ShapeError("image: dims must be positive, got " + std::to_string(h) +
                       "x" + std::to_string(w));
    if (!(spacing_mm > 0))
      throw DataError("image: pixel spacing must be > 0 mm");
    pixels.assign(size_t(h) * size_t(w), 0.0f);
  }

  std::int64_t numel() const { return std::int64_t(height) * width; }
  float& at(int y, int x) { return pixels[size_t(y) * size_t(width) + size_t(x)]; }
  float at(int y, int x) const { return pixels[size_t(y) * size_t(width) + size_t(x)]; }

  bool same_dims(const Image& o) const {
    return height == o.height && width == o.width;
  }
};

inline void require_same_dims(const Image& a, const Image& b, const char* op) {
  if (!a.same_dims(b))
    throw ShapeError(std::string(op) + ": image dims differ, " +
                     std::to_string(a.height) + "x" + std::to_string(a.width) +
                     " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width));
}

/// Single-image batch tensor (1, 1, h, w) for feeding the network.
inline Tensor<float> to_tensor(const Image& img) {
  Tensor<float> t(Shape{1, 1, img.height, img.width});
  t.data = img.pixels;
  return t;
}

inline Image from_tensor(const Tensor<float>& t, float spacing_mm) {
  if (t.shape.n != 1 || t.shape.c != 1)
    throw ShapeError("from_tensor: expected shape (1,1,h,w), got " + t.shape.str());
  Image img(t.shape.h, t.shape.w, spacing_mm);
  img.pixels = t.data;
  return img;
}

}  // namespace mwd
