// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <climits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "burstkernel/error.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/parallel.hpp"

namespace burstkernel {
namespace {

// The FFTW planner is not reentrant, whichever cache a plan belongs to.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <Real T>
struct Fftw;

template <>
struct Fftw<double> {
  using Complex = fftw_complex;
  using Plan = fftw_plan;
  static double* alloc_real(std::size_t n) { return fftw_alloc_real(n); }
  static Complex* alloc_complex(std::size_t n) { return fftw_alloc_complex(n); }
  static void free(void* p) { fftw_free(p); }
  static Plan r2c(int ny, int nx, double* in, Complex* out) {
    return fftw_plan_dft_r2c_2d(ny, nx, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int ny, int nx, Complex* in, double* out) {
    return fftw_plan_dft_c2r_2d(ny, nx, in, out, FFTW_ESTIMATE);
  }
  static void forward(Plan p, double* in, Complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void inverse(Plan p, Complex* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
};

template <>
struct Fftw<float> {
  using Complex = fftwf_complex;
  using Plan = fftwf_plan;
  static float* alloc_real(std::size_t n) { return fftwf_alloc_real(n); }
  static Complex* alloc_complex(std::size_t n) { return fftwf_alloc_complex(n); }
  static void free(void* p) { fftwf_free(p); }
  static Plan r2c(int ny, int nx, float* in, Complex* out) {
    return fftwf_plan_dft_r2c_2d(ny, nx, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int ny, int nx, Complex* in, float* out) {
    return fftwf_plan_dft_c2r_2d(ny, nx, in, out, FFTW_ESTIMATE);
  }
  static void forward(Plan p, float* in, Complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void inverse(Plan p, Complex* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
};

// fftw_malloc'd array; every buffer handed to a cached plan comes from here so
// alignment matches the planning arrays.
template <Real T, typename E>
class FftwArray {
 public:
  FftwArray() = default;
  explicit FftwArray(std::size_t n) : size_(n) {
    if constexpr (std::is_same_v<E, T>) {
      data_ = Fftw<T>::alloc_real(std::max<std::size_t>(n, 1));
    } else {
      data_ = Fftw<T>::alloc_complex(std::max<std::size_t>(n, 1));
    }
    if (data_ == nullptr) throw NumericalError("FFTW allocation failed");
  }
  ~FftwArray() {
    if (data_ != nullptr) Fftw<T>::free(data_);
  }
  FftwArray(FftwArray&& o) noexcept : data_(std::exchange(o.data_, nullptr)), size_(o.size_) {}
  FftwArray& operator=(FftwArray&& o) noexcept {
    std::swap(data_, o.data_);
    std::swap(size_, o.size_);
    return *this;
  }
  FftwArray(const FftwArray&) = delete;
  FftwArray& operator=(const FftwArray&) = delete;

  E* get() noexcept { return data_; }
  const E* get() const noexcept { return data_; }
  std::size_t size() const noexcept { return size_; }

 private:
  E* data_ = nullptr;
  std::size_t size_ = 0;
};

template <Real T>
using RealArray = FftwArray<T, T>;
template <Real T>
using ComplexArray = FftwArray<T, typename Fftw<T>::Complex>;

template <Real T>
struct PlanPair {
  typename Fftw<T>::Plan forward = nullptr;
  typename Fftw<T>::Plan inverse = nullptr;
};

}  // namespace

struct FftPlanCache::Impl {
  mutable std::shared_mutex mutex;
  std::map<std::pair<int, int>, PlanPair<double>> doubles;
  std::map<std::pair<int, int>, PlanPair<float>> floats;

  template <Real T>
  std::map<std::pair<int, int>, PlanPair<T>>& table() {
    if constexpr (std::is_same_v<T, double>) {
      return doubles;
    } else {
      return floats;
    }
  }

  template <Real T>
  PlanPair<T> get(int ny, int nx) {
    const auto key = std::pair{ny, nx};
    {
      std::shared_lock lock(mutex);
      auto& t = table<T>();
      if (auto it = t.find(key); it != t.end()) return it->second;
    }
    std::unique_lock lock(mutex);
    auto& t = table<T>();
    if (auto it = t.find(key); it != t.end()) return it->second;
    const std::size_t points = static_cast<std::size_t>(ny) * nx;
    const std::size_t bins = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    RealArray<T> real(points);
    ComplexArray<T> spectrum(bins);
    PlanPair<T> plans;
    {
      std::lock_guard planner(planner_mutex());
      plans.forward = Fftw<T>::r2c(ny, nx, real.get(), spectrum.get());
      plans.inverse = Fftw<T>::c2r(ny, nx, spectrum.get(), real.get());
    }
    if (plans.forward == nullptr || plans.inverse == nullptr) {
      throw NumericalError("FFTW could not plan a " + std::to_string(ny) + "x" +
                           std::to_string(nx) + " transform");
    }
    t.emplace(key, plans);
    return plans;
  }

  template <Real T>
  void release() {
    std::lock_guard planner(planner_mutex());
    for (auto& [key, plans] : table<T>()) {
      Fftw<T>::destroy(plans.forward);
      Fftw<T>::destroy(plans.inverse);
    }
    table<T>().clear();
  }

  ~Impl() {
    release<double>();
    release<float>();
  }
};

FftPlanCache::FftPlanCache() : impl_(std::make_unique<Impl>()) {}
FftPlanCache::~FftPlanCache() = default;

FftPlanCache& FftPlanCache::shared() {
  static FftPlanCache cache;
  return cache;
}

std::size_t FftPlanCache::size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->doubles.size() + impl_->floats.size();
}

void FftPlanCache::clear() {
  std::unique_lock lock(impl_->mutex);
  impl_->release<double>();
  impl_->release<float>();
}

int next_fast_fft_size(int n) {
  if (n <= 1) return 1;
  for (long long m = n; m <= INT_MAX; ++m) {
    long long r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return static_cast<int>(m);
  }
  throw DataError("no {2,3,5}-smooth FFT size >= " + std::to_string(n) + " fits in an int");
}

FourierGrid fourier_grid(int height, int width, int kernel_size, int tile) {
  if (height < 1 || width < 1) throw DataError("image must be non-empty");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw UsageError("kernel size must be odd");
  if (tile < 0) throw UsageError("tile size must be >= 0");
  FourierGrid g;
  g.tile_h = tile == 0 ? height : std::min(tile, height);
  g.tile_w = tile == 0 ? width : std::min(tile, width);
  g.tiles_y = (height + g.tile_h - 1) / g.tile_h;
  g.tiles_x = (width + g.tile_w - 1) / g.tile_w;
  const long long need_h = static_cast<long long>(g.tile_h) + kernel_size - 1;
  const long long need_w = static_cast<long long>(g.tile_w) + kernel_size - 1;
  if (need_h > INT_MAX || need_w > INT_MAX) throw DataError("FFT size overflow");
  g.fft_h = next_fast_fft_size(static_cast<int>(need_h));
  g.fft_w = next_fast_fft_size(static_cast<int>(need_w));
  if (static_cast<long long>(g.fft_h) * g.fft_w > INT_MAX) {
    throw DataError("FFT grid " + std::to_string(g.fft_h) + "x" + std::to_string(g.fft_w) +
                    " is too large");
  }
  return g;
}

namespace {

template <Real T>
class FourierFilter {
 public:
  using Complex = typename Fftw<T>::Complex;

  FourierFilter(const Burst<T>& noisy, const KernelBasis<T>& basis,
                const CoefficientField<T>& coeffs, const FourierOptions& options,
                FftPlanCache& cache)
      : noisy_(noisy),
        basis_(basis),
        coeffs_(coeffs),
        shape_(basis.shape()),
        grid_(fourier_grid(noisy.height(), noisy.width(), shape_.size, options.tile)),
        plans_(cache.impl().template get<T>(grid_.fft_h, grid_.fft_w)) {
    const std::size_t spectra = static_cast<std::size_t>(basis.elements()) * shape_.frames *
                                shape_.groups;
    nonzero_.assign(spectra, 0);
    for (int iy = 0; iy < shape_.size; ++iy) {
      for (int ix = 0; ix < shape_.size; ++ix) {
        for (int t = 0; t < shape_.frames; ++t) {
          for (int g = 0; g < shape_.groups; ++g) {
            for (int b = 0; b < basis.elements(); ++b) {
              if (basis.at(iy, ix, t, g, b) != T(0)) nonzero_[spectrum_slot(b, t, g)] = 1;
            }
          }
        }
      }
    }
    const std::size_t bytes = spectra * grid_.bins() * sizeof(Complex);
    if (bytes <= options.spectrum_budget_bytes) {
      kernel_spectra_ = ComplexArray<T>(spectra * grid_.bins());
      RealArray<T> real(grid_.points());
      for (int b = 0; b < basis.elements(); ++b) {
        for (int t = 0; t < shape_.frames; ++t) {
          for (int g = 0; g < shape_.groups; ++g) {
            if (!nonzero_[spectrum_slot(b, t, g)]) continue;
            kernel_spectrum(b, t, g, real.get(),
                            kernel_spectra_.get() + spectrum_slot(b, t, g) * grid_.bins());
          }
        }
      }
    }
  }

  Image<T> run() {
    Image<T> out(noisy_.height(), noisy_.width(), noisy_.channels());
    parallel_for(0, grid_.tiles(), [&](std::ptrdiff_t i) {
      const int ty = static_cast<int>(i) / grid_.tiles_x;
      const int tx = static_cast<int>(i) % grid_.tiles_x;
      filter_tile(ty * grid_.tile_h, tx * grid_.tile_w, out);
    });
    return out;
  }

 private:
  std::size_t spectrum_slot(int b, int t, int g) const {
    return (static_cast<std::size_t>(b) * shape_.frames + t) * shape_.groups + g;
  }

  // Places v_{b,t,g} with offset d at index d mod N, scaled by 1 / N so the
  // inverse transform needs no separate normalization.
  void kernel_spectrum(int b, int t, int g, T* real, Complex* out) const {
    const int ny = grid_.fft_h;
    const int nx = grid_.fft_w;
    const int r = shape_.radius();
    const T scale = T(1) / static_cast<T>(grid_.points());
    std::fill(real, real + grid_.points(), T(0));
    for (int iy = 0; iy < shape_.size; ++iy) {
      const int py = (iy - r + ny) % ny;
      for (int ix = 0; ix < shape_.size; ++ix) {
        const int px = (ix - r + nx) % nx;
        real[static_cast<std::size_t>(py) * nx + px] += basis_.at(iy, ix, t, g, b) * scale;
      }
    }
    Fftw<T>::forward(plans_.forward, real, out);
  }

  void filter_tile(int y0, int x0, Image<T>& out) const {
    const int h = noisy_.height();
    const int w = noisy_.width();
    const int th = std::min(grid_.tile_h, h - y0);
    const int tw = std::min(grid_.tile_w, w - x0);
    const int nx = grid_.fft_w;
    const int r = shape_.radius();
    const int frames = noisy_.num_frames();
    const int elements = basis_.elements();
    const std::size_t bins = grid_.bins();

    RealArray<T> real(grid_.points());
    ComplexArray<T> frame_spectra(bins * static_cast<std::size_t>(frames));
    ComplexArray<T> acc(bins);
    ComplexArray<T> scratch;
    if (kernel_spectra_.size() == 0) scratch = ComplexArray<T>(bins);

    for (int c = 0; c < noisy_.channels(); ++c) {
      const int g = shape_.groups == 1 ? 0 : c;
      for (int t = 0; t < frames; ++t) {
        const auto& f = noisy_.frame(t);
        std::fill(real.get(), real.get() + grid_.points(), T(0));
        for (int j = 0; j < th + 2 * r; ++j) {
          const int y = y0 - r + j;
          if (y < 0 || y >= h) continue;
          for (int i = 0; i < tw + 2 * r; ++i) {
            const int x = x0 - r + i;
            if (x < 0 || x >= w) continue;
            real.get()[static_cast<std::size_t>(j) * nx + i] = f(y, x, c);
          }
        }
        Fftw<T>::forward(plans_.forward, real.get(), frame_spectra.get() + t * bins);
      }

      for (int b = 0; b < elements; ++b) {
        bool any = false;
        for (int t = 0; t < frames; ++t) any = any || nonzero_[spectrum_slot(b, t, g)];
        if (!any) continue;  // contributes exact zeros
        std::fill(&acc.get()[0][0], &acc.get()[0][0] + 2 * bins, T(0));
        for (int t = 0; t < frames; ++t) {
          if (!nonzero_[spectrum_slot(b, t, g)]) continue;
          const Complex* v;
          if (kernel_spectra_.size() != 0) {
            v = kernel_spectra_.get() + spectrum_slot(b, t, g) * bins;
          } else {
            kernel_spectrum(b, t, g, real.get(), scratch.get());
            v = scratch.get();
          }
          const Complex* x = frame_spectra.get() + t * bins;
          Complex* a = acc.get();
          for (std::size_t k = 0; k < bins; ++k) {
            a[k][0] += x[k][0] * v[k][0] - x[k][1] * v[k][1];
            a[k][1] += x[k][0] * v[k][1] + x[k][1] * v[k][0];
          }
        }
        Fftw<T>::inverse(plans_.inverse, acc.get(), real.get());
        for (int j = 0; j < th; ++j) {
          const T* row = real.get() + static_cast<std::size_t>(j + r) * nx + r;
          for (int i = 0; i < tw; ++i) {
            out(y0 + j, x0 + i, c) += coeffs_.at(y0 + j, x0 + i)[static_cast<std::size_t>(b)] * row[i];
          }
        }
      }
    }
  }

  const Burst<T>& noisy_;
  const KernelBasis<T>& basis_;
  const CoefficientField<T>& coeffs_;
  KernelShape shape_;
  FourierGrid grid_;
  PlanPair<T> plans_;
  ComplexArray<T> kernel_spectra_;
  std::vector<char> nonzero_;  // per (b, t, g) kernel slice
};

}  // namespace

template <Real T>
Image<T> filter_fourier(const Burst<T>& noisy, const KernelBasis<T>& basis,
                        const CoefficientField<T>& coeffs, const FourierOptions& options,
                        FftPlanCache* cache) {
  if (noisy.height() != coeffs.height() || noisy.width() != coeffs.width()) {
    throw DataError("coefficient field is " + std::to_string(coeffs.height()) + "x" +
                    std::to_string(coeffs.width()) + " but the burst is " +
                    std::to_string(noisy.height()) + "x" + std::to_string(noisy.width()));
  }
  if (basis.elements() != coeffs.elements()) throw DataError("basis and coefficient sizes differ");
  detail::check_kernel_fits(noisy.num_frames(), noisy.channels(), basis.shape());
  FourierFilter<T> filter(noisy, basis, coeffs, options,
                          cache != nullptr ? *cache : FftPlanCache::shared());
  return filter.run();
}

template Image<float> filter_fourier(const Burst<float>&, const KernelBasis<float>&,
                                     const CoefficientField<float>&, const FourierOptions&,
                                     FftPlanCache*);
template Image<double> filter_fourier(const Burst<double>&, const KernelBasis<double>&,
                                      const CoefficientField<double>&, const FourierOptions&,
                                      FftPlanCache*);

}  // namespace burstkernel
