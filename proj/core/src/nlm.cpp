// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/nlm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "burstkernel/error.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/parallel.hpp"

namespace burstkernel {
namespace {

// Variance floor keeps logits finite for noiseless inputs.
constexpr double kMinVariance = 1e-12;

// Box sum of radius r over a padded (ph x pw) grid, evaluated at the
// unpadded (h x w) positions. `src` holds the padded grid, origin offset r.
void box_sum(const std::vector<double>& src, int ph, int pw, int r, int h, int w,
             std::vector<double>& rows, std::vector<double>& out) {
  rows.assign(static_cast<std::size_t>(ph) * w, 0.0);
  for (int y = 0; y < ph; ++y) {
    const double* s = src.data() + static_cast<std::size_t>(y) * pw;
    double* d = rows.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k <= 2 * r; ++k) acc += s[x + k];
      d[x] = acc;
    }
  }
  out.assign(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y) {
    double* d = out.data() + static_cast<std::size_t>(y) * w;
    for (int k = 0; k <= 2 * r; ++k) {
      const double* s = rows.data() + static_cast<std::size_t>(y + k) * w;
      for (int x = 0; x < w; ++x) d[x] += s[x];
    }
  }
}

}  // namespace

template <Real T>
KernelField<T> estimate_kernels_nlm(const Burst<T>& noisy, const NoiseParams& params,
                                    const NlmOptions& options) {
  if (options.kernel_size < 1 || options.kernel_size % 2 == 0) {
    throw UsageError("NLM kernel size must be odd");
  }
  if (!(options.bandwidth > 0.0)) throw UsageError("NLM bandwidth must be > 0");
  if (options.patch_radius < 0) throw UsageError("patch radius must be >= 0");

  const int h = noisy.height();
  const int w = noisy.width();
  const int channels = noisy.channels();
  const int frames = noisy.num_frames();
  const int groups = options.per_channel ? channels : 1;
  const KernelShape shape{options.kernel_size, frames, groups};
  const int radius = shape.radius();
  const int pr = options.patch_radius;
  const int ph = h + 2 * pr;
  const int pw = w + 2 * pr;
  const double patch_area = static_cast<double>((2 * pr + 1) * (2 * pr + 1));
  // Channels averaged into one distance per shared group.
  const int channels_per_group = options.per_channel ? 1 : channels;

  KernelField<T> field(h, w, shape);
  const auto& ref = noisy.reference();

  auto sample = [](const Image<T>& img, int y, int x, int c) -> double {
    if (y < 0 || x < 0 || y >= img.height() || x >= img.width()) return 0.0;
    return img(y, x, c);
  };

  // Per-pixel, per-group 1 / (2 h^2 var).
  std::vector<double> inv_scale(static_cast<std::size_t>(h) * w * groups);
  {
    std::vector<double> padded(static_cast<std::size_t>(ph) * pw);
    std::vector<double> rows;
    std::vector<double> sums;
    for (int g = 0; g < groups; ++g) {
      std::fill(padded.begin(), padded.end(), 0.0);
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          double acc = 0.0;
          for (int k = 0; k < channels_per_group; ++k) {
            acc += sample(ref, y - pr, x - pr, options.per_channel ? g : k);
          }
          padded[static_cast<std::size_t>(y) * pw + x] = acc / channels_per_group;
        }
      }
      box_sum(padded, ph, pw, pr, h, w, rows, sums);
      const double h2 = options.bandwidth * options.bandwidth;
      for (std::size_t i = 0; i < sums.size(); ++i) {
        const double local_mean = sums[i] / patch_area;
        const double var = std::max(params.variance(local_mean), kMinVariance);
        inv_scale[i * groups + g] = 1.0 / (2.0 * h2 * var);
      }
    }
  }

  const int size = options.kernel_size;
  // One task per (frame, tap row); tasks write disjoint taps.
  parallel_for(0, static_cast<std::ptrdiff_t>(frames) * size, [&](std::ptrdiff_t task) {
    const int t = static_cast<int>(task / size);
    const int iy = static_cast<int>(task % size);
    const int dy = iy - radius;
    const auto& frame = noisy.frame(t);
    std::vector<double> diff(static_cast<std::size_t>(ph) * pw);
    std::vector<double> rows;
    std::vector<double> sums;
    for (int ix = 0; ix < size; ++ix) {
      const int dx = ix - radius;
      for (int g = 0; g < groups; ++g) {
        for (int y = 0; y < ph; ++y) {
          for (int x = 0; x < pw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < channels_per_group; ++k) {
              const int c = options.per_channel ? g : k;
              const double e = sample(ref, y - pr, x - pr, c) -
                               sample(frame, y - pr - dy, x - pr - dx, c);
              acc += e * e;
            }
            diff[static_cast<std::size_t>(y) * pw + x] = acc / channels_per_group;
          }
        }
        box_sum(diff, ph, pw, pr, h, w, rows, sums);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double dist2 = sums[i] / patch_area;
            field.at(y, x, iy, ix, t, g) = static_cast<T>(-dist2 * inv_scale[i * groups + g]);
          }
        }
      }
    }
  });

  parallel_for(0, h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < w; ++x) {
      auto k = field.kernel(static_cast<int>(y), x);
      for (int g = 0; g < groups; ++g) {
        softmax_inplace(k, static_cast<std::size_t>(g), static_cast<std::size_t>(groups),
                        shape.taps_per_group());
      }
    }
  });
  field.set_normalized(true);
  return field;
}

template <Real T>
KernelField<T> delta_kernel_field(int height, int width, KernelShape shape) {
  KernelField<T> field(height, width, shape, true);
  const int r = shape.radius();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < shape.groups; ++c) field.at(y, x, r, r, 0, c) = T(1);
    }
  }
  return field;
}

template KernelField<float> estimate_kernels_nlm(const Burst<float>&, const NoiseParams&,
                                                 const NlmOptions&);
template KernelField<double> estimate_kernels_nlm(const Burst<double>&, const NoiseParams&,
                                                  const NlmOptions&);
template KernelField<float> delta_kernel_field(int, int, KernelShape);
template KernelField<double> delta_kernel_field(int, int, KernelShape);

}  // namespace burstkernel
