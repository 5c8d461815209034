// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

// Conventions shared by every backend:
//   * out[n] = sum_t sum_d w_n[d, t] * I[n - d, t]   (true convolution, no flip)
//   * samples outside the frame are zero
//   * a field or basis with one channel group applies the same kernel to every
//     image channel; otherwise group c filters channel c.

enum class Backend { kDirect, kFactored, kFourier };

std::string_view to_string(Backend backend);
/// "direct", "factored" or "fourier"; throws UsageError otherwise.
Backend parse_backend(std::string_view name);

/// Per-pixel kernel filtering with a dense kernel field.
template <Real T>
Image<T> filter_direct(const Burst<T>& noisy, const KernelField<T>& field);

/// filter_direct restricted to the field.height() x field.width() block of
/// `out` whose top-left pixel is (y0, x0); kernel (j, i) of the field belongs
/// to output pixel (y0 + j, x0 + i). Samples outside the burst are zero, so
/// stitching blocks reproduces filter_direct exactly.
template <Real T>
void filter_direct_region(const Burst<T>& noisy, const KernelField<T>& field, int y0, int x0,
                          Image<T>& out);

/// Spatially uniform 2D convolution of a single-channel plane with a K x K
/// kernel given in (dy, dx) row-major order. Output has the input's size.
template <Real T>
Image<T> conv2d_uniform(const Image<T>& plane, std::span<const T> kernel, int size);

/// Filters each frame with each basis element by uniform convolution, then
/// mixes the B filtered images per pixel with the coefficients.
template <Real T>
Image<T> filter_factored(const Burst<T>& noisy, const KernelBasis<T>& basis,
                         const CoefficientField<T>& coeffs);

/// Single-frame estimates R_t[n] = T * sum_d w_n[d, t] I[n - d, t]. Their
/// mean over t equals filter_direct.
template <Real T>
std::vector<Image<T>> per_frame_estimates(const Burst<T>& noisy, const KernelField<T>& field);

namespace detail {
/// Throws DataError unless the kernel shape fits the burst.
void check_kernel_fits(int frames, int channels, const KernelShape& shape);
}  // namespace detail

}  // namespace burstkernel
