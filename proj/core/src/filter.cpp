// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/filter.hpp"

#include <algorithm>
#include <string>

#include "burstkernel/error.hpp"
#include "burstkernel/parallel.hpp"

namespace burstkernel {
namespace {

void check_same_grid(int h, int w, int fh, int fw, const char* what) {
  if (h != fh || w != fw) {
    throw DataError(std::string(what) + " is " + std::to_string(fh) + "x" + std::to_string(fw) +
                    " but the burst is " + std::to_string(h) + "x" + std::to_string(w));
  }
}

// out[y, x] += sum_{iy, ix} tap(iy, ix) * in[y + r - iy, x + r - ix], zero
// outside the plane. Taps are visited in row-major order for every pixel.
template <Real T, typename TapFn>
void convolve_accumulate(const T* in, int h, int w, int size, TapFn tap, T* out) {
  const int r = (size - 1) / 2;
  for (int iy = 0; iy < size; ++iy) {
    const int dy = iy - r;
    const int y0 = std::max(0, dy);
    const int y1 = std::min(h, h + dy);
    for (int ix = 0; ix < size; ++ix) {
      const int dx = ix - r;
      const int x0 = std::max(0, dx);
      const int x1 = std::min(w, w + dx);
      const T v = tap(iy, ix);
      if (x0 >= x1 || v == T(0)) continue;
      for (int y = y0; y < y1; ++y) {
        T* dst = out + static_cast<std::size_t>(y) * w;
        const T* src = in + static_cast<std::size_t>(y - dy) * w - dx;
#pragma omp simd
        for (int x = x0; x < x1; ++x) dst[x] += v * src[x];
      }
    }
  }
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kDirect: return "direct";
    case Backend::kFactored: return "factored";
    case Backend::kFourier: return "fourier";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "direct") return Backend::kDirect;
  if (name == "factored") return Backend::kFactored;
  if (name == "fourier") return Backend::kFourier;
  throw UsageError("unknown backend '" + std::string(name) +
                   "' (expected direct, factored or fourier)");
}

namespace detail {

void check_kernel_fits(int frames, int channels, const KernelShape& shape) {
  if (shape.frames != frames) {
    throw DataError("kernels span " + std::to_string(shape.frames) + " frames but the burst has " +
                    std::to_string(frames));
  }
  if (shape.groups != 1 && shape.groups != channels) {
    throw DataError("kernels have " + std::to_string(shape.groups) +
                    " channel groups but the burst has " + std::to_string(channels) + " channels");
  }
}

}  // namespace detail

template <Real T>
void filter_direct_region(const Burst<T>& noisy, const KernelField<T>& field, int y0, int x0,
                          Image<T>& out) {
  const auto& shape = field.shape();
  detail::check_kernel_fits(noisy.num_frames(), noisy.channels(), shape);
  const int h = noisy.height();
  const int w = noisy.width();
  const int th = field.height();
  const int tw = field.width();
  if (y0 < 0 || x0 < 0 || y0 + th > h || x0 + tw > w) {
    throw DataError("kernel field region " + std::to_string(th) + "x" + std::to_string(tw) +
                    " at (" + std::to_string(y0) + ", " + std::to_string(x0) +
                    ") does not fit the " + std::to_string(h) + "x" + std::to_string(w) +
                    " burst");
  }
  if (out.height() != h || out.width() != w || out.channels() != noisy.channels()) {
    throw DataError("output image does not match the burst");
  }

  const int frames = noisy.num_frames();
  const int size = shape.size;
  const int groups = shape.groups;
  const int r = shape.radius();
  const int hp = th + 2 * r;
  const int wp = tw + 2 * r;
  const int span = size * frames;

  // Zero-padded copy of the region plus halo, x reversed and frames
  // interleaved, so each kernel row meets a contiguous run of K * T samples.
  std::vector<T> padded(static_cast<std::size_t>(hp) * wp * frames);
  for (int c = 0; c < noisy.channels(); ++c) {
    std::fill(padded.begin(), padded.end(), T(0));
    for (int t = 0; t < frames; ++t) {
      const auto& f = noisy.frame(t);
      for (int j = 0; j < hp; ++j) {
        const int y = y0 - r + j;
        if (y < 0 || y >= h) continue;
        for (int i = 0; i < wp; ++i) {
          const int x = x0 - r + i;
          if (x < 0 || x >= w) continue;
          const std::size_t xr = static_cast<std::size_t>(wp - 1 - i);
          padded[(static_cast<std::size_t>(j) * wp + xr) * frames + t] = f(y, x, c);
        }
      }
    }
    const int g = groups == 1 ? 0 : c;
    parallel_for(0, th, [&](std::ptrdiff_t jj) {
      const int j = static_cast<int>(jj);
      for (int i = 0; i < tw; ++i) {
        const T* weights = field.kernel(j, i).data();
        const std::size_t xr0 = static_cast<std::size_t>(wp - 1 - i - 2 * r);
        T acc = 0;
        for (int iy = 0; iy < size; ++iy) {
          const T* src =
              padded.data() + (static_cast<std::size_t>(j + 2 * r - iy) * wp + xr0) * frames;
          const T* wrow = weights + static_cast<std::size_t>(iy) * span * groups + g;
          if (groups == 1) {
#pragma omp simd reduction(+ : acc)
            for (int k = 0; k < span; ++k) acc += wrow[k] * src[k];
          } else {
            for (int k = 0; k < span; ++k) acc += wrow[static_cast<std::size_t>(k) * groups] * src[k];
          }
        }
        out(y0 + j, x0 + i, c) = acc;
      }
    });
  }
}

template <Real T>
Image<T> filter_direct(const Burst<T>& noisy, const KernelField<T>& field) {
  check_same_grid(noisy.height(), noisy.width(), field.height(), field.width(), "kernel field");
  Image<T> out(noisy.height(), noisy.width(), noisy.channels());
  filter_direct_region(noisy, field, 0, 0, out);
  return out;
}

template <Real T>
Image<T> conv2d_uniform(const Image<T>& plane, std::span<const T> kernel, int size) {
  if (plane.channels() != 1) throw DataError("conv2d_uniform expects a single-channel plane");
  if (size < 1 || size % 2 == 0) throw UsageError("kernel size must be odd");
  if (kernel.size() != static_cast<std::size_t>(size) * size) {
    throw DataError("kernel has " + std::to_string(kernel.size()) + " taps, expected " +
                    std::to_string(size * size));
  }
  Image<T> out(plane.height(), plane.width(), 1);
  convolve_accumulate(plane.values().data(), plane.height(), plane.width(), size,
                      [&](int iy, int ix) { return kernel[static_cast<std::size_t>(iy) * size + ix]; },
                      out.values().data());
  return out;
}

template <Real T>
Image<T> filter_factored(const Burst<T>& noisy, const KernelBasis<T>& basis,
                         const CoefficientField<T>& coeffs) {
  check_same_grid(noisy.height(), noisy.width(), coeffs.height(), coeffs.width(),
                     "coefficient field");
  if (basis.elements() != coeffs.elements()) {
    throw DataError("basis and coefficient sizes differ");
  }
  const auto& shape = basis.shape();
  detail::check_kernel_fits(noisy.num_frames(), noisy.channels(), shape);

  const int h = noisy.height();
  const int w = noisy.width();
  const int channels = noisy.channels();
  const int frames = noisy.num_frames();
  const int elements = basis.elements();
  const std::size_t pixels = static_cast<std::size_t>(h) * w;

  std::vector<Image<T>> planes;  // index t * channels + c
  planes.reserve(static_cast<std::size_t>(frames) * channels);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < channels; ++c) planes.push_back(noisy.frame(t).channel(c));
  }

  Image<T> out(h, w, channels);
  auto dst = out.values();
  const auto mix = coeffs.values();
  // One task per channel; within a task the b-order of the mixing sum is fixed.
  parallel_for(0, channels, [&](std::ptrdiff_t cc) {
    const int c = static_cast<int>(cc);
    const int g = shape.groups == 1 ? 0 : c;
    std::vector<T> filtered(pixels);
    for (int b = 0; b < elements; ++b) {
      std::fill(filtered.begin(), filtered.end(), T(0));
      for (int t = 0; t < frames; ++t) {
        const auto& plane = planes[static_cast<std::size_t>(t) * channels + c];
        convolve_accumulate(plane.values().data(), h, w, shape.size,
                            [&](int iy, int ix) { return basis.at(iy, ix, t, g, b); },
                            filtered.data());
      }
      for (std::size_t p = 0; p < pixels; ++p) {
        dst[p * channels + c] += mix[p * elements + b] * filtered[p];
      }
    }
  });
  return out;
}

template <Real T>
std::vector<Image<T>> per_frame_estimates(const Burst<T>& noisy, const KernelField<T>& field) {
  check_same_grid(noisy.height(), noisy.width(), field.height(), field.width(), "kernel field");
  const auto& shape = field.shape();
  detail::check_kernel_fits(noisy.num_frames(), noisy.channels(), shape);
  const int h = noisy.height();
  const int w = noisy.width();
  const int frames = noisy.num_frames();
  const int r = shape.radius();
  const T scale = static_cast<T>(frames);

  std::vector<Image<T>> estimates;
  estimates.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    const auto& f = noisy.frame(t);
    Image<T> est(h, w, noisy.channels());
    parallel_for(0, h, [&](std::ptrdiff_t yy) {
      const int y = static_cast<int>(yy);
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < noisy.channels(); ++c) {
          const int g = shape.groups == 1 ? 0 : c;
          T acc = 0;
          for (int iy = 0; iy < shape.size; ++iy) {
            const int sy = y + r - iy;
            if (sy < 0 || sy >= h) continue;
            for (int ix = 0; ix < shape.size; ++ix) {
              const int sx = x + r - ix;
              if (sx < 0 || sx >= w) continue;
              acc += field.at(y, x, iy, ix, t, g) * f(sy, sx, c);
            }
          }
          est(y, x, c) = scale * acc;
        }
      }
    });
    estimates.push_back(std::move(est));
  }
  return estimates;
}

#define BURSTKERNEL_INSTANTIATE(T)                                                          \
  template Image<T> filter_direct(const Burst<T>&, const KernelField<T>&);                  \
  template void filter_direct_region(const Burst<T>&, const KernelField<T>&, int, int,      \
                                     Image<T>&);                                            \
  template Image<T> conv2d_uniform(const Image<T>&, std::span<const T>, int);               \
  template Image<T> filter_factored(const Burst<T>&, const KernelBasis<T>&,                 \
                                    const CoefficientField<T>&);                            \
  template std::vector<Image<T>> per_frame_estimates(const Burst<T>&, const KernelField<T>&);

BURSTKERNEL_INSTANTIATE(float)
BURSTKERNEL_INSTANTIATE(double)
#undef BURSTKERNEL_INSTANTIATE

}  // namespace burstkernel
