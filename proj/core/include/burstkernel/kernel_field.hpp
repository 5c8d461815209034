// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "burstkernel/image.hpp"

namespace burstkernel {

/// Shape of one spatio-temporal kernel: K x K taps for each of `frames`
/// frames and `groups` channel groups (1, or one group per image channel).
/// Taps are stored in (dy, dx, t, c) order. Tap index iy corresponds to
/// the offset dy = iy - radius(), and a tap at offset d reads I[n - d].
struct KernelShape {
  int size = 1;
  int frames = 1;
  int groups = 1;

  int radius() const noexcept { return (size - 1) / 2; }
  std::size_t taps_per_group() const noexcept {
    return static_cast<std::size_t>(size) * size * frames;
  }
  std::size_t taps() const noexcept { return taps_per_group() * groups; }
  std::size_t tap_index(int iy, int ix, int t, int c) const noexcept {
    return ((static_cast<std::size_t>(iy) * size + ix) * frames + t) * groups + c;
  }

  /// Throws UsageError unless size is odd and all extents are positive.
  void validate() const;

  friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// One kernel per output pixel, layout (y, x, dy, dx, t, c).
template <Real T>
class KernelField {
 public:
  KernelField() = default;
  KernelField(int height, int width, KernelShape shape, bool normalized = false);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  const KernelShape& shape() const noexcept { return shape_; }

  /// Set by construction paths that guarantee nonnegative weights summing to
  /// one per pixel and channel group (softmax, convex mixing, projection).
  bool is_normalized() const noexcept { return normalized_; }
  void set_normalized(bool normalized) noexcept { normalized_ = normalized; }

  std::span<T> kernel(int y, int x) noexcept {
    return {weights_.data() + pixel_offset(y, x), shape_.taps()};
  }
  std::span<const T> kernel(int y, int x) const noexcept {
    return {weights_.data() + pixel_offset(y, x), shape_.taps()};
  }

  T& at(int y, int x, int iy, int ix, int t, int c = 0) noexcept {
    return weights_[pixel_offset(y, x) + shape_.tap_index(iy, ix, t, c)];
  }
  T at(int y, int x, int iy, int ix, int t, int c = 0) const noexcept {
    return weights_[pixel_offset(y, x) + shape_.tap_index(iy, ix, t, c)];
  }

  std::span<T> weights() noexcept { return weights_; }
  std::span<const T> weights() const noexcept { return weights_; }

  template <Real U>
  KernelField<U> cast() const {
    KernelField<U> out(height_, width_, shape_, normalized_);
    std::copy(weights_.begin(), weights_.end(), out.weights().begin());
    return out;
  }

  friend bool operator==(const KernelField&, const KernelField&) = default;

 private:
  std::size_t pixel_offset(int y, int x) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * shape_.taps();
  }

  int height_ = 0;
  int width_ = 0;
  KernelShape shape_{};
  bool normalized_ = false;
  std::vector<T> weights_;
};

/// B global kernels, layout (dy, dx, t, c, b).
template <Real T>
class KernelBasis {
 public:
  KernelBasis() = default;
  KernelBasis(int elements, KernelShape shape, bool normalized = false);

  int elements() const noexcept { return elements_; }
  const KernelShape& shape() const noexcept { return shape_; }
  bool is_normalized() const noexcept { return normalized_; }
  void set_normalized(bool normalized) noexcept { normalized_ = normalized; }

  T& at(int iy, int ix, int t, int c, int b) noexcept {
    return values_[shape_.tap_index(iy, ix, t, c) * elements_ + b];
  }
  T at(int iy, int ix, int t, int c, int b) const noexcept {
    return values_[shape_.tap_index(iy, ix, t, c) * elements_ + b];
  }
  /// Flat access: tap index in (dy, dx, t, c) order, element b.
  T& tap(std::size_t tap, int b) noexcept { return values_[tap * elements_ + b]; }
  T tap(std::size_t tap, int b) const noexcept { return values_[tap * elements_ + b]; }

  /// Element b as a contiguous (dy, dx, t, c) vector.
  std::vector<T> element(int b) const;
  void set_element(int b, std::span<const T> taps);

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  template <Real U>
  KernelBasis<U> cast() const {
    KernelBasis<U> out(elements_, shape_, normalized_);
    std::copy(values_.begin(), values_.end(), out.values().begin());
    return out;
  }

  friend bool operator==(const KernelBasis&, const KernelBasis&) = default;

 private:
  int elements_ = 0;
  KernelShape shape_{};
  bool normalized_ = false;
  std::vector<T> values_;
};

/// Per-pixel mixing coefficients, layout (y, x, b).
template <Real T>
class CoefficientField {
 public:
  CoefficientField() = default;
  CoefficientField(int height, int width, int elements, bool normalized = false);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int elements() const noexcept { return elements_; }
  bool is_normalized() const noexcept { return normalized_; }
  void set_normalized(bool normalized) noexcept { normalized_ = normalized; }

  std::span<T> at(int y, int x) noexcept {
    return {values_.data() + (static_cast<std::size_t>(y) * width_ + x) * elements_,
            static_cast<std::size_t>(elements_)};
  }
  std::span<const T> at(int y, int x) const noexcept {
    return {values_.data() + (static_cast<std::size_t>(y) * width_ + x) * elements_,
            static_cast<std::size_t>(elements_)};
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  template <Real U>
  CoefficientField<U> cast() const {
    CoefficientField<U> out(height_, width_, elements_, normalized_);
    std::copy(values_.begin(), values_.end(), out.values().begin());
    return out;
  }

  friend bool operator==(const CoefficientField&, const CoefficientField&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int elements_ = 0;
  bool normalized_ = false;
  std::vector<T> values_;
};

using KernelFieldF = KernelField<float>;
using KernelFieldD = KernelField<double>;
using KernelBasisF = KernelBasis<float>;
using KernelBasisD = KernelBasis<double>;
using CoefficientFieldF = CoefficientField<float>;
using CoefficientFieldD = CoefficientField<double>;

}  // namespace burstkernel
