// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "burstkernel/filter.hpp"
#include "burstkernel/image.hpp"

namespace burstkernel {

/// Returned by psnr for identical images.
inline constexpr double kPsnrCap = 99.0;

template <Real T>
double mse(const Image<T>& a, const Image<T>& b);

/// 10 log10(1 / MSE) for [0, 1] intensities, capped at kPsnrCap.
template <Real T>
double psnr(const Image<T>& a, const Image<T>& b);

struct LossTerms {
  double l2_intensity = 0.0;
  /// Mean over pixels and channels of |dx(pred - truth)| + |dy(pred - truth)|,
  /// forward differences, zero on the last column / row.
  double l1_gradient = 0.0;
};

template <Real T>
LossTerms loss_terms(const Image<T>& pred, const Image<T>& truth);

enum class PredictionMode { kKpn, kBasis };

/// Values a predictor has to emit per burst:
///   kpn:   H W K^2 T C
///   basis: H W B + K^2 T C B
/// Throws UsageError on non-positive sizes and DataError if the count does
/// not fit in 64 bits.
std::uint64_t prediction_count(std::int64_t height, std::int64_t width, std::int64_t kernel_size,
                               std::int64_t frames, std::int64_t elements, PredictionMode mode,
                               std::int64_t channels = 1);

/// Analytic cost of one filtering pass.
///   direct:   filter_macs = H W K^2 T C
///   factored: filter_macs = H W K^2 T B C, mixing_macs = H W B C
///   fourier:  mixing_macs = H W B C and, with n points per transform and
///             `bins` half-spectrum bins,
///               fft_flops = transforms * 2.5 n log2 n + 6 * bins * products
///             where untiled transforms = T C + B T C + B C and
///             products = B T C; a tiled run repeats the frame and inverse
///             transforms and the products per tile.
///   total_flops = 2 (filter_macs + mixing_macs) + fft_flops
struct FlopReport {
  Backend backend = Backend::kDirect;
  int height = 0;
  int width = 0;
  int kernel_size = 0;
  int frames = 0;
  int elements = 0;
  int channels = 0;
  int tile = 0;
  std::uint64_t prediction_count = 0;
  std::uint64_t filter_macs = 0;
  std::uint64_t mixing_macs = 0;
  std::uint64_t transforms = 0;
  std::uint64_t transform_points = 0;
  double fft_flops = 0.0;
  double total_flops = 0.0;
};

FlopReport flop_report(int height, int width, int kernel_size, int frames, int elements,
                       int channels, Backend backend, int tile = 0);

}  // namespace burstkernel
