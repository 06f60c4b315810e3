#pragma once

#include <cstdint>
#include <string>

#include "mwdenoise/parallel.hpp"
#include "mwdenoise/tensor.hpp"

namespace mwd {

// One level of the 2D Haar transform, stride 2, scale 1/2 on both directions.
// Filters over a 2x2 block [[a, b], [c, d]]:
//   LL = ( a + b + c + d) / 2      [[ 1,  1], [ 1,  1]]
//   LH = (-a - b + c + d) / 2      [[-1, -1], [ 1,  1]]
//   HL = (-a + b - c + d) / 2      [[-1,  1], [-1,  1]]
//   HH = ( a - b - c + d) / 2      [[ 1, -1], [-1,  1]]
// With the same 1/2 on the inverse the transform is orthonormal: it preserves
// sum of squares and the adjoint equals the inverse, so dwt's backward pass is
// iwt's forward and vice versa.
//
// Channel layout: input channel k maps to output channels 4k..4k+3 in the
// order (LL, LH, HL, HH).

template <typename T>
Tensor<T> dwt_forward(const Tensor<T>& input) {
  const Shape& s = input.shape;
  if (s.h % 2 != 0 || s.w % 2 != 0)
    throw ShapeError("dwt: spatial dims must be even, got " + s.str());
  const int hh = s.h / 2, hw = s.w / 2;
  Tensor<T> out(Shape{s.n, s.c * 4, hh, hw});

  parallel_for(std::int64_t(s.n) * s.c, [&](std::int64_t task) {
    const int b = int(task / s.c);
    const int ch = int(task % s.c);
    const T* src = input.plane(b, ch);
    T* ll = out.plane(b, 4 * ch + 0);
    T* lh = out.plane(b, 4 * ch + 1);
    T* hl = out.plane(b, 4 * ch + 2);
    T* hh_ = out.plane(b, 4 * ch + 3);
    for (int y = 0; y < hh; ++y) {
      const T* r0 = src + std::int64_t(2 * y) * s.w;
      const T* r1 = r0 + s.w;
      const std::int64_t o = std::int64_t(y) * hw;
      for (int x = 0; x < hw; ++x) {
        const T a = r0[2 * x], bb = r0[2 * x + 1];
        const T c = r1[2 * x], d = r1[2 * x + 1];
        ll[o + x] = (a + bb + c + d) / T(2);
        lh[o + x] = (-a - bb + c + d) / T(2);
        hl[o + x] = (-a + bb - c + d) / T(2);
        hh_[o + x] = (a - bb - c + d) / T(2);
      }
    }
  });
  return out;
}

template <typename T>
Tensor<T> iwt_forward(const Tensor<T>& input) {
  const Shape& s = input.shape;
  if (s.c % 4 != 0)
    throw ShapeError("iwt: channel count must be a multiple of 4, got " + s.str());
  const int oc = s.c / 4;
  Tensor<T> out(Shape{s.n, oc, s.h * 2, s.w * 2});

  parallel_for(std::int64_t(s.n) * oc, [&](std::int64_t task) {
    const int b = int(task / oc);
    const int ch = int(task % oc);
    const T* ll = input.plane(b, 4 * ch + 0);
    const T* lh = input.plane(b, 4 * ch + 1);
    const T* hl = input.plane(b, 4 * ch + 2);
    const T* hh_ = input.plane(b, 4 * ch + 3);
    T* dst = out.plane(b, ch);
    const int ow = s.w * 2;
    for (int y = 0; y < s.h; ++y) {
      T* r0 = dst + std::int64_t(2 * y) * ow;
      T* r1 = r0 + ow;
      const std::int64_t o = std::int64_t(y) * s.w;
      for (int x = 0; x < s.w; ++x) {
        const T LL = ll[o + x], LH = lh[o + x];
        const T HL = hl[o + x], HH = hh_[o + x];
        r0[2 * x] = (LL - LH - HL + HH) / T(2);
        r0[2 * x + 1] = (LL - LH + HL - HH) / T(2);
        r1[2 * x] = (LL + LH - HL - HH) / T(2);
        r1[2 * x + 1] = (LL + LH + HL + HH) / T(2);
      }
    }
  });
  return out;
}

// Orthonormality makes the adjoints trivial.
template <typename T>
Tensor<T> dwt_backward(const Tensor<T>& grad_out) {
  return iwt_forward(grad_out);
}

template <typename T>
Tensor<T> iwt_backward(const Tensor<T>& grad_out) {
  return dwt_forward(grad_out);
}

}  // namespace mwd
