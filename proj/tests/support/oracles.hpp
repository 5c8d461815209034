// SPDX-License-Identifier: Apache-2.0
// Slow reference implementations written straight from the definitions.
// They share no code with the library beyond the container types.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"
#include "burstkernel/metrics.hpp"

namespace burstkernel::testing {

using TestRng = std::mt19937_64;

ImageD random_image(int h, int w, int c, TestRng& rng);
BurstD random_burst(int h, int w, int c, int frames, TestRng& rng);
/// Gaussian logits; softmaxed per (pixel, group) when `normalized`.
KernelFieldD random_field(int h, int w, KernelShape shape, TestRng& rng, bool normalized = true);
KernelBasisD random_basis(int elements, KernelShape shape, TestRng& rng, bool normalized = true);
CoefficientFieldD random_coefficients(int h, int w, int elements, TestRng& rng,
                                      bool normalized = true);

template <Real T>
double max_abs_diff(const Image<T>& a, const Image<T>& b);

/// out[y, x, c] = sum over (iy, ix, t) of w * I[y - dy, x - dx, t, c], zero outside.
ImageD naive_filter(const BurstD& burst, const KernelFieldD& field);
/// Same sum restricted to frame t and multiplied by T.
ImageD naive_frame_estimate(const BurstD& burst, const KernelFieldD& field, int t);
/// w_n = sum_b v_b c_n[b], one tap at a time.
KernelFieldD naive_reconstruct(const KernelBasisD& basis, const CoefficientFieldD& coeffs);
ImageD naive_conv2d(const ImageD& plane, const std::vector<double>& kernel, int size);

/// Brute-force non-local-means weights of one pixel and channel group, in
/// (dy, dx, t) order. group < 0 averages distances over all channels.
std::vector<double> naive_nlm_kernel(const BurstD& burst, const NoiseParams& params, int y, int x,
                                     int kernel_size, int patch_radius, double bandwidth,
                                     int group = -1);

double naive_mse(const ImageD& a, const ImageD& b);
LossTerms naive_loss_terms(const ImageD& pred, const ImageD& truth);

/// Singular values of the (H W) x (taps) field matrix by one-sided Jacobi.
std::vector<double> jacobi_singular_values(const KernelFieldD& field);
/// Rank of a row-stacked set of vectors by Jacobi SVD.
int jacobi_rank(const std::vector<std::vector<double>>& rows, double tol);

double naive_wcss(const CoefficientFieldD& coeffs, const std::vector<int>& labels, int k);

/// Re-evaluates the cost model from its definition, with its own FFT sizing.
struct FlopOracle {
  std::uint64_t filter_macs = 0;
  std::uint64_t mixing_macs = 0;
  std::uint64_t transforms = 0;
  double fft_flops = 0.0;
  double total_flops = 0.0;
};
FlopOracle flop_oracle(int h, int w, int k, int t, int b, int c, Backend backend, int tile);

}  // namespace burstkernel::testing
