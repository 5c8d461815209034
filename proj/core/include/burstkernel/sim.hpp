// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "burstkernel/image.hpp"

namespace burstkernel {

using Rng = std::mt19937_64;

/// Sensor gain presets in log10 units. Level 8 lies beyond the noise range
/// that sample_noise_params draws from.
struct GainPreset {
  int level = 1;
  double log10_sigma_s = 0.0;
  double log10_sigma_r = 0.0;
  bool outside_training_range = false;

  NoiseParams params() const;
};

/// level in {1, 2, 4, 8}; anything else throws UsageError.
GainPreset gain_preset(int level);
std::span<const GainPreset> gain_presets();

/// log10(sigma_r) ~ U[-3, -1.5], log10(sigma_s) ~ U[-4, -2].
NoiseParams sample_noise_params(Rng& rng);

inline constexpr double kLog10SigmaRMin = -3.0;
inline constexpr double kLog10SigmaRMax = -1.5;
inline constexpr double kLog10SigmaSMin = -4.0;
inline constexpr double kLog10SigmaSMax = -2.0;

struct MotionConfig {
  int max_shift = 2;  ///< bound on |dy| and |dx| for every frame
  int jitter = 1;     ///< per-frame independent perturbation on top of the drift
  /// Seed of the stream passed to synth_motion, kept for metadata.
  std::uint64_t seed = 0;
};

/// Integer translation of one frame relative to the reference crop.
struct Shift {
  int dy = 0;
  int dx = 0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

template <Real T>
struct MotionBurst {
  Burst<T> burst;
  std::vector<Shift> shifts;  ///< one per frame, shifts[0] == {0, 0}
};

/// Crops frame t as clean(y + m + dy_t, x + m + dx_t) for a central
/// (H - 2m) x (W - 2m) window, m = max_shift.
template <Real T>
Burst<T> crop_shifted(const Image<T>& clean, std::span<const Shift> shifts, int max_shift);

/// Linear drift plus per-frame jitter, clamped to [-max_shift, max_shift].
std::vector<Shift> sample_shifts(int frames, const MotionConfig& cfg, Rng& rng);

template <Real T>
MotionBurst<T> synth_motion(const Image<T>& clean, int frames, const MotionConfig& cfg,
                            Rng& rng);

/// Each sample drawn from N(X, sigma_r^2 + sigma_s^2 * max(X, 0)), no clipping.
template <Real T>
Burst<T> add_noise(const Burst<T>& clean, const NoiseParams& params, Rng& rng);

/// Piecewise-smooth test scene in [0.05, 0.95]: gradient background, filled
/// ellipses and rectangles, and a band-limited texture patch.
template <Real T>
Image<T> make_synthetic_scene(int height, int width, int channels, Rng& rng);

}  // namespace burstkernel
