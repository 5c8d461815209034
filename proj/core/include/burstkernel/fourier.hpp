// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>

#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

/// Cache of FFTW real-to-complex / complex-to-real plan pairs keyed by
/// precision and transform size. Lookups may run concurrently; insertion
/// takes an exclusive lock. Plans are made with FFTW_ESTIMATE, so a cold
/// cache and a warm one produce identical results.
class FftPlanCache {
 public:
  FftPlanCache();
  ~FftPlanCache();
  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

  /// Process-wide instance used when no cache is passed explicitly.
  static FftPlanCache& shared();

  std::size_t size() const;
  /// Must not race with filtering that uses this cache.
  void clear();

  struct Impl;
  Impl& impl() noexcept { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

struct FourierOptions {
  /// 0 transforms whole frames; otherwise outputs are computed in
  /// tile x tile blocks, each reading a (K - 1) / 2 halo around it.
  int tile = 0;
  /// Kernel spectra are precomputed once per call while they fit in this
  /// many bytes, and recomputed per tile otherwise.
  std::size_t spectrum_budget_bytes = std::size_t{768} << 20;
};

/// Smallest integer >= n whose prime factors are all in {2, 3, 5}.
/// Throws DataError when the result would not fit in an int.
int next_fast_fft_size(int n);

struct FourierGrid {
  int tile_h = 0;
  int tile_w = 0;
  int fft_h = 0;
  int fft_w = 0;
  int tiles_y = 0;
  int tiles_x = 0;

  int tiles() const noexcept { return tiles_y * tiles_x; }
  /// Real samples per transform.
  std::size_t points() const noexcept { return static_cast<std::size_t>(fft_h) * fft_w; }
  /// Complex bins of the half spectrum.
  std::size_t bins() const noexcept { return static_cast<std::size_t>(fft_h) * (fft_w / 2 + 1); }
};

/// Transform grid used by filter_fourier for an H x W image and K x K
/// kernels. tile = 0 means one full-frame tile; a tile larger than the image
/// is clipped to it.
FourierGrid fourier_grid(int height, int width, int kernel_size, int tile);

/// Frequency-domain version of filter_factored. Frame spectra are computed
/// once per tile and reused for every basis element; each element needs a
/// single inverse transform per tile and channel.
template <Real T>
Image<T> filter_fourier(const Burst<T>& noisy, const KernelBasis<T>& basis,
                        const CoefficientField<T>& coeffs, const FourierOptions& options = {},
                        FftPlanCache* cache = nullptr);

}  // namespace burstkernel
