// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <string>

#include "burstkernel/error.hpp"
#include "burstkernel/fourier.hpp"

namespace burstkernel {
namespace {

template <Real T>
void require_same_shape(const Image<T>& a, const Image<T>& b) {
  if (!a.same_shape(b)) {
    throw DataError("image shapes differ: " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                    std::to_string(b.channels()));
  }
  if (a.empty()) throw DataError("images are empty");
}

__extension__ typedef unsigned __int128 Wide;

std::uint64_t narrow(Wide v) {
  if (v > std::numeric_limits<std::uint64_t>::max()) throw DataError("count overflows 64 bits");
  return static_cast<std::uint64_t>(v);
}

Wide product(std::initializer_list<std::int64_t> factors) {
  Wide acc = 1;
  for (auto f : factors) {
    acc *= static_cast<Wide>(f);
    // Factors are < 2^63, so checking after each step keeps acc < 2^127.
    if (acc > std::numeric_limits<std::uint64_t>::max()) throw DataError("count overflows 64 bits");
  }
  return acc;
}

}  // namespace

template <Real T>
double mse(const Image<T>& a, const Image<T>& b) {
  require_same_shape(a, b);
  const auto va = a.values();
  const auto vb = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va[i]) - static_cast<double>(vb[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(va.size());
}

template <Real T>
double psnr(const Image<T>& a, const Image<T>& b) {
  const double m = mse(a, b);
  if (!(m > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(m));
}

template <Real T>
LossTerms loss_terms(const Image<T>& pred, const Image<T>& truth) {
  require_same_shape(pred, truth);
  const int h = pred.height();
  const int w = pred.width();
  const int channels = pred.channels();
  auto diff = [&](int y, int x, int c) {
    return static_cast<double>(pred(y, x, c)) - static_cast<double>(truth(y, x, c));
  };
  double l2 = 0.0;
  double l1 = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double d = diff(y, x, c);
        l2 += d * d;
        if (x + 1 < w) l1 += std::abs(diff(y, x + 1, c) - d);
        if (y + 1 < h) l1 += std::abs(diff(y + 1, x, c) - d);
      }
    }
  }
  const double n = static_cast<double>(pred.size());
  return {l2 / n, l1 / n};
}

std::uint64_t prediction_count(std::int64_t height, std::int64_t width, std::int64_t kernel_size,
                               std::int64_t frames, std::int64_t elements, PredictionMode mode,
                               std::int64_t channels) {
  for (auto v : {height, width, kernel_size, frames, elements, channels}) {
    if (v < 1) throw UsageError("prediction_count needs positive sizes");
  }
  if (mode == PredictionMode::kKpn) {
    return narrow(product({width, height, kernel_size, kernel_size, frames, channels}));
  }
  return narrow(product({width, height, elements}) +
                product({kernel_size, kernel_size, frames, channels, elements}));
}

FlopReport flop_report(int height, int width, int kernel_size, int frames, int elements,
                       int channels, Backend backend, int tile) {
  for (int v : {height, width, kernel_size, frames, elements, channels}) {
    if (v < 1) throw UsageError("flop_report needs positive sizes");
  }
  if (tile < 0) throw UsageError("tile size must be >= 0");
  FlopReport r;
  r.backend = backend;
  r.height = height;
  r.width = width;
  r.kernel_size = kernel_size;
  r.frames = frames;
  r.elements = elements;
  r.channels = channels;
  r.tile = tile;
  const std::int64_t h = height, w = width, k = kernel_size, t = frames, b = elements,
                     c = channels;

  switch (backend) {
    case Backend::kDirect:
      r.prediction_count = prediction_count(h, w, k, t, b, PredictionMode::kKpn, c);
      r.filter_macs = narrow(product({h, w, k, k, t, c}));
      break;
    case Backend::kFactored:
      r.prediction_count = prediction_count(h, w, k, t, b, PredictionMode::kBasis, c);
      r.filter_macs = narrow(product({h, w, k, k, t, b, c}));
      r.mixing_macs = narrow(product({h, w, b, c}));
      break;
    case Backend::kFourier: {
      r.prediction_count = prediction_count(h, w, k, t, b, PredictionMode::kBasis, c);
      r.mixing_macs = narrow(product({h, w, b, c}));
      const FourierGrid grid = fourier_grid(height, width, kernel_size, tile);
      const std::int64_t tiles = grid.tiles();
      const Wide per_tile = product({t, c}) + product({b, c});
      r.transforms = narrow(product({tiles}) * per_tile + product({b, t, c}));
      r.transform_points = grid.points();
      const std::uint64_t products = narrow(product({tiles, b, t, c}));
      const double n = static_cast<double>(r.transform_points);
      r.fft_flops = static_cast<double>(r.transforms) * (2.5 * n * std::log2(n)) +
                    6.0 * static_cast<double>(grid.bins()) * static_cast<double>(products);
      break;
    }
  }
  r.total_flops =
      2.0 * (static_cast<double>(r.filter_macs) + static_cast<double>(r.mixing_macs)) + r.fft_flops;
  return r;
}

template double mse(const Image<float>&, const Image<float>&);
template double mse(const Image<double>&, const Image<double>&);
template double psnr(const Image<float>&, const Image<float>&);
template double psnr(const Image<double>&, const Image<double>&);
template LossTerms loss_terms(const Image<float>&, const Image<float>&);
template LossTerms loss_terms(const Image<double>&, const Image<double>&);

}  // namespace burstkernel
