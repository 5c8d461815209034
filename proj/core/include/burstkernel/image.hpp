// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace burstkernel {

template <typename T>
concept Real = std::same_as<T, float> || std::same_as<T, double>;

/// Dense H x W x C intensity grid, row-major with interleaved channels.
/// Nominal range is [0, 1]; noisy data may leave it.
template <Real T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int height, int width, int channels = 1, T fill = T(0));
  Image(int height, int width, int channels, std::vector<T> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
  const T& operator()(int y, int x, int c = 0) const noexcept {
    return data_[index(y, x, c)];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  /// Single-channel copy of channel `c`.
  Image channel(int c) const;
  void set_channel(int c, const Image& plane);

  template <Real U>
  Image<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Image<U>(height_, width_, channels_, std::move(out));
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

/// True when every sample is finite.
template <Real T>
bool all_finite(const Image<T>& image);

/// T aligned frames of identical shape. Frame 0 is the reference.
template <Real T>
class Burst {
 public:
  Burst() = default;
  explicit Burst(std::vector<Image<T>> frames);

  int num_frames() const noexcept { return static_cast<int>(frames_.size()); }
  int height() const noexcept { return frames_.empty() ? 0 : frames_[0].height(); }
  int width() const noexcept { return frames_.empty() ? 0 : frames_[0].width(); }
  int channels() const noexcept { return frames_.empty() ? 0 : frames_[0].channels(); }

  const Image<T>& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
  const Image<T>& reference() const { return frame(0); }
  std::span<const Image<T>> frames() const noexcept { return frames_; }

  template <Real U>
  Burst<U> cast() const {
    std::vector<Image<U>> out;
    out.reserve(frames_.size());
    for (const auto& f : frames_) out.push_back(f.template cast<U>());
    return Burst<U>(std::move(out));
  }

  friend bool operator==(const Burst&, const Burst&) = default;

 private:
  std::vector<Image<T>> frames_;
};

/// Read and shot noise standard deviations, in intensity units.
struct NoiseParams {
  double sigma_r = 0.0;
  double sigma_s = 0.0;

  /// sigma_r^2 + sigma_s^2 * max(x, 0)
  double variance(double x) const noexcept {
    return sigma_r * sigma_r + sigma_s * sigma_s * (x > 0.0 ? x : 0.0);
  }

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

using ImageF = Image<float>;
using ImageD = Image<double>;
using BurstF = Burst<float>;
using BurstD = Burst<double>;

}  // namespace burstkernel
