// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "burstkernel/error.hpp"

namespace burstkernel {
namespace {

constexpr std::array<GainPreset, 4> kPresets = {{
    {1, -2.2, -2.6, false},
    {2, -1.8, -2.2, false},
    {4, -1.4, -1.8, false},
    {8, -1.1, -1.5, true},
}};

}  // namespace

NoiseParams GainPreset::params() const {
  return {std::pow(10.0, log10_sigma_r), std::pow(10.0, log10_sigma_s)};
}

GainPreset gain_preset(int level) {
  for (const auto& p : kPresets) {
    if (p.level == level) return p;
  }
  throw UsageError("unknown gain level " + std::to_string(level) + " (expected 1, 2, 4 or 8)");
}

std::span<const GainPreset> gain_presets() { return kPresets; }

NoiseParams sample_noise_params(Rng& rng) {
  std::uniform_real_distribution<double> log_r(kLog10SigmaRMin, kLog10SigmaRMax);
  std::uniform_real_distribution<double> log_s(kLog10SigmaSMin, kLog10SigmaSMax);
  const double r = log_r(rng);
  const double s = log_s(rng);
  return {std::pow(10.0, r), std::pow(10.0, s)};
}

template <Real T>
Burst<T> crop_shifted(const Image<T>& clean, std::span<const Shift> shifts, int max_shift) {
  if (max_shift < 0) throw UsageError("max_shift must be >= 0");
  if (shifts.empty()) throw UsageError("need at least one frame");
  const int h = clean.height() - 2 * max_shift;
  const int w = clean.width() - 2 * max_shift;
  if (h < 1 || w < 1) {
    throw DataError("image " + std::to_string(clean.height()) + "x" +
                    std::to_string(clean.width()) + " too small for max_shift " +
                    std::to_string(max_shift));
  }
  std::vector<Image<T>> frames;
  frames.reserve(shifts.size());
  for (const auto& s : shifts) {
    if (std::abs(s.dy) > max_shift || std::abs(s.dx) > max_shift) {
      throw UsageError("shift exceeds max_shift");
    }
    Image<T> f(h, w, clean.channels());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < clean.channels(); ++c) {
          f(y, x, c) = clean(y + max_shift + s.dy, x + max_shift + s.dx, c);
        }
      }
    }
    frames.push_back(std::move(f));
  }
  return Burst<T>(std::move(frames));
}

std::vector<Shift> sample_shifts(int frames, const MotionConfig& cfg, Rng& rng) {
  if (frames < 1) throw UsageError("frames must be >= 1");
  if (cfg.max_shift < 0 || cfg.jitter < 0) throw UsageError("max_shift and jitter must be >= 0");
  std::vector<Shift> shifts(static_cast<std::size_t>(frames));
  if (frames == 1 || cfg.max_shift == 0) return shifts;

  const double vmax = static_cast<double>(cfg.max_shift) / (frames - 1);
  std::uniform_real_distribution<double> velocity(-vmax, vmax);
  std::uniform_int_distribution<int> jitter(-cfg.jitter, cfg.jitter);
  const double vy = velocity(rng);
  const double vx = velocity(rng);
  for (int t = 1; t < frames; ++t) {
    const int jy = jitter(rng);
    const int jx = jitter(rng);
    auto& s = shifts[static_cast<std::size_t>(t)];
    s.dy = std::clamp(static_cast<int>(std::lround(vy * t)) + jy, -cfg.max_shift, cfg.max_shift);
    s.dx = std::clamp(static_cast<int>(std::lround(vx * t)) + jx, -cfg.max_shift, cfg.max_shift);
  }
  return shifts;
}

template <Real T>
MotionBurst<T> synth_motion(const Image<T>& clean, int frames, const MotionConfig& cfg,
                            Rng& rng) {
  auto shifts = sample_shifts(frames, cfg, rng);
  auto burst = crop_shifted(clean, std::span<const Shift>(shifts), cfg.max_shift);
  return {std::move(burst), std::move(shifts)};
}

template <Real T>
Burst<T> add_noise(const Burst<T>& clean, const NoiseParams& params, Rng& rng) {
  if (params.sigma_r < 0.0 || params.sigma_s < 0.0) {
    throw UsageError("noise parameters must be >= 0");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Image<T>> frames;
  frames.reserve(static_cast<std::size_t>(clean.num_frames()));
  for (const auto& f : clean.frames()) {
    Image<T> noisy = f;
    for (T& v : noisy.values()) {
      const double x = v;
      v = static_cast<T>(x + std::sqrt(params.variance(x)) * gauss(rng));
    }
    frames.push_back(std::move(noisy));
  }
  return Burst<T>(std::move(frames));
}

template <Real T>
Image<T> make_synthetic_scene(int height, int width, int channels, Rng& rng) {
  if (height < 1 || width < 1) throw UsageError("scene must be non-empty");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image<double> scene(height, width, channels);

  // Background gradient.
  std::vector<double> base(channels), gy(channels), gx(channels);
  for (int c = 0; c < channels; ++c) {
    base[c] = 0.25 + 0.5 * unit(rng);
    gy[c] = (unit(rng) - 0.5) * 0.4;
    gx[c] = (unit(rng) - 0.5) * 0.4;
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        scene(y, x, c) = base[c] + gy[c] * y / height + gx[c] * x / width;
      }
    }
  }

  const int shapes = 6 + static_cast<int>(unit(rng) * 8);
  for (int s = 0; s < shapes; ++s) {
    const double cy = unit(rng) * height;
    const double cx = unit(rng) * width;
    const double ry = (0.05 + 0.25 * unit(rng)) * height;
    const double rx = (0.05 + 0.25 * unit(rng)) * width;
    const bool ellipse = unit(rng) < 0.5;
    std::vector<double> value(channels);
    for (int c = 0; c < channels; ++c) value[c] = 0.1 + 0.8 * unit(rng);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double u = (y - cy) / ry;
        const double v = (x - cx) / rx;
        const bool inside = ellipse ? u * u + v * v <= 1.0 : std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < channels; ++c) scene(y, x, c) = value[c];
      }
    }
  }

  // Texture patch: a sum of two oriented sinusoids inside a rectangle.
  const int ty0 = static_cast<int>(unit(rng) * height * 0.5);
  const int tx0 = static_cast<int>(unit(rng) * width * 0.5);
  const int ty1 = std::min(height, ty0 + height / 3 + 1);
  const int tx1 = std::min(width, tx0 + width / 3 + 1);
  const double f1 = 0.15 + 0.35 * unit(rng);
  const double f2 = 0.15 + 0.35 * unit(rng);
  const double theta = unit(rng) * std::numbers::pi;
  for (int y = ty0; y < ty1; ++y) {
    for (int x = tx0; x < tx1; ++x) {
      const double a = std::sin(f1 * (std::cos(theta) * x + std::sin(theta) * y));
      const double b = std::sin(f2 * (std::cos(theta) * y - std::sin(theta) * x));
      for (int c = 0; c < channels; ++c) scene(y, x, c) += 0.12 * (a + b);
    }
  }

  Image<T> out(height, width, channels);
  auto src = scene.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<T>(std::clamp(src[i], 0.05, 0.95));
  }
  return out;
}

#define BURSTKERNEL_INSTANTIATE(T)                                                        \
  template Burst<T> crop_shifted(const Image<T>&, std::span<const Shift>, int);           \
  template MotionBurst<T> synth_motion(const Image<T>&, int, const MotionConfig&, Rng&);  \
  template Burst<T> add_noise(const Burst<T>&, const NoiseParams&, Rng&);                 \
  template Image<T> make_synthetic_scene(int, int, int, Rng&);

BURSTKERNEL_INSTANTIATE(float)
BURSTKERNEL_INSTANTIATE(double)
#undef BURSTKERNEL_INSTANTIATE

}  // namespace burstkernel
