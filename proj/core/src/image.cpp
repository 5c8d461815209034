// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/image.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "burstkernel/error.hpp"

namespace burstkernel {

template <Real T>
Image<T>::Image(int height, int width, int channels, T fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 1) {
    throw UsageError("image dimensions must be non-negative with at least one channel");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

template <Real T>
Image<T>::Image(int height, int width, int channels, std::vector<T> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 0 || width < 0 || channels < 1) {
    throw UsageError("image dimensions must be non-negative with at least one channel");
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw DataError("image data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(height) + "x" +
                    std::to_string(width) + "x" + std::to_string(channels));
  }
}

template <Real T>
Image<T> Image<T>::channel(int c) const {
  Image plane(height_, width_, 1);
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  for (std::size_t i = 0; i < n; ++i) plane.data_[i] = data_[i * channels_ + c];
  return plane;
}

template <Real T>
void Image<T>::set_channel(int c, const Image& plane) {
  if (plane.height_ != height_ || plane.width_ != width_ || plane.channels_ != 1) {
    throw DataError("channel plane shape mismatch");
  }
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  for (std::size_t i = 0; i < n; ++i) data_[i * channels_ + c] = plane.data_[i];
}

template <Real T>
bool all_finite(const Image<T>& image) {
  for (T v : image.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <Real T>
Burst<T>::Burst(std::vector<Image<T>> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw DataError("a burst needs at least one frame");
  for (const auto& f : frames_) {
    if (!f.same_shape(frames_[0])) {
      throw DataError("all burst frames must share height, width and channels");
    }
  }
}

template class Image<float>;
template class Image<double>;
template class Burst<float>;
template class Burst<double>;
template bool all_finite(const Image<float>&);
template bool all_finite(const Image<double>&);

}  // namespace burstkernel
