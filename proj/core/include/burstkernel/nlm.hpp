// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

struct NlmOptions {
  int kernel_size = 15;
  int patch_radius = 10;
  /// Bandwidth relative to the local noise standard deviation.
  double bandwidth = 0.6;
  /// One kernel group per image channel instead of a single shared group.
  bool per_channel = false;
};

/// Non-local-means kernel field over the burst.
///
/// For pixel n, frame t and offset d the logit is
///   -dist2(n, n - d, t) / (2 h^2 var(n))
/// where dist2 is the mean squared difference between the reference patch at
/// n and the patch at n - d in frame t, and var(n) = sigma_r^2 + sigma_s^2 *
/// mean(reference patch at n). Samples outside the frame read as zero, the
/// same padding the filters use. Kernels are the softmax of the logits over
/// all (d, t), so the field is normalized.
template <Real T>
KernelField<T> estimate_kernels_nlm(const Burst<T>& noisy, const NoiseParams& params,
                                    const NlmOptions& options = {});

/// All weight on offset 0 of the reference frame: filtering returns the
/// reference frame unchanged.
template <Real T>
KernelField<T> delta_kernel_field(int height, int width, KernelShape shape);

}  // namespace burstkernel
