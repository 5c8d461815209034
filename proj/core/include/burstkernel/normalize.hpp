// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

/// exp(v - max v) / sum. Throws NumericalError on non-finite input.
template <Real T>
std::vector<T> softmax_normalize(std::span<const T> values);

/// In-place variant over a strided view: entries values[offset + i * stride]
/// for i < count.
template <Real T>
void softmax_inplace(std::span<T> values, std::size_t offset, std::size_t stride,
                     std::size_t count);

/// Replaces each (pixel, channel group) kernel by the softmax of its taps.
/// The result carries the normalized flag.
template <Real T>
void softmax_kernel_groups(KernelField<T>& logits);

/// Softmax over each basis element, separately per channel group.
template <Real T>
void softmax_basis_elements(KernelBasis<T>& logits);

/// Softmax over each per-pixel coefficient vector.
template <Real T>
void softmax_coefficients(CoefficientField<T>& logits);

struct KernelFieldReport {
  double max_sum_deviation = 0.0;  ///< max over pixels and groups of |sum w - 1|
  double min_weight = 0.0;
  std::size_t violating_pixels = 0;  ///< pixels with a group off by > tol or a weight < -tol

  bool ok() const noexcept { return violating_pixels == 0; }
};

template <Real T>
KernelFieldReport validate_kernel_field(const KernelField<T>& field, double tol = 1e-5);

/// True when every element (per channel group) is nonnegative and sums to 1.
template <Real T>
bool basis_is_averaging(const KernelBasis<T>& basis, double tol = 1e-5);

template <Real T>
bool coefficients_are_averaging(const CoefficientField<T>& coeffs, double tol = 1e-5);

}  // namespace burstkernel
