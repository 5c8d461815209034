// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "burstkernel/error.hpp"

namespace burstkernel {

template <Real T>
void softmax_inplace(std::span<T> values, std::size_t offset, std::size_t stride,
                     std::size_t count) {
  if (count == 0) return;
  T peak = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    const T v = values[offset + i * stride];
    if (!std::isfinite(v)) throw NumericalError("softmax input is not finite");
    peak = std::max(peak, v);
  }
  // Sum in double so f32 inputs still meet the 1e-6 sum contract.
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    T& v = values[offset + i * stride];
    v = std::exp(v - peak);
    total += v;
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < count; ++i) {
    T& v = values[offset + i * stride];
    v = static_cast<T>(v * inv);
  }
}

template <Real T>
std::vector<T> softmax_normalize(std::span<const T> values) {
  std::vector<T> out(values.begin(), values.end());
  softmax_inplace(std::span<T>(out), 0, 1, out.size());
  return out;
}

template <Real T>
void softmax_kernel_groups(KernelField<T>& logits) {
  const auto& shape = logits.shape();
  const auto groups = static_cast<std::size_t>(shape.groups);
  for (int y = 0; y < logits.height(); ++y) {
    for (int x = 0; x < logits.width(); ++x) {
      auto k = logits.kernel(y, x);
      for (std::size_t c = 0; c < groups; ++c) {
        softmax_inplace(k, c, groups, shape.taps_per_group());
      }
    }
  }
  logits.set_normalized(true);
}

template <Real T>
void softmax_basis_elements(KernelBasis<T>& logits) {
  const auto& shape = logits.shape();
  const auto groups = static_cast<std::size_t>(shape.groups);
  const auto stride = groups * static_cast<std::size_t>(logits.elements());
  for (int b = 0; b < logits.elements(); ++b) {
    for (std::size_t c = 0; c < groups; ++c) {
      softmax_inplace(logits.values(), c * logits.elements() + b, stride,
                      shape.taps_per_group());
    }
  }
  logits.set_normalized(true);
}

template <Real T>
void softmax_coefficients(CoefficientField<T>& logits) {
  for (int y = 0; y < logits.height(); ++y) {
    for (int x = 0; x < logits.width(); ++x) {
      auto c = logits.at(y, x);
      softmax_inplace(c, 0, 1, c.size());
    }
  }
  logits.set_normalized(true);
}

template <Real T>
KernelFieldReport validate_kernel_field(const KernelField<T>& field, double tol) {
  KernelFieldReport report;
  const auto& shape = field.shape();
  const auto groups = static_cast<std::size_t>(shape.groups);
  const auto per_group = shape.taps_per_group();
  bool first = true;
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      const auto k = field.kernel(y, x);
      bool bad = false;
      for (std::size_t c = 0; c < groups; ++c) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < per_group; ++i) {
          const double w = k[c + i * groups];
          sum += w;
          lo = std::min(lo, w);
        }
        const double dev = std::abs(sum - 1.0);
        report.max_sum_deviation = std::max(report.max_sum_deviation, dev);
        report.min_weight = first ? lo : std::min(report.min_weight, lo);
        first = false;
        if (!(dev <= tol) || lo < -tol) bad = true;
      }
      if (bad) ++report.violating_pixels;
    }
  }
  return report;
}

template <Real T>
bool basis_is_averaging(const KernelBasis<T>& basis, double tol) {
  const auto& shape = basis.shape();
  const auto groups = static_cast<std::size_t>(shape.groups);
  for (int b = 0; b < basis.elements(); ++b) {
    for (std::size_t c = 0; c < groups; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < shape.taps_per_group(); ++i) {
        const double v = basis.tap(i * groups + c, b);
        if (v < -tol) return false;
        sum += v;
      }
      if (!(std::abs(sum - 1.0) <= tol)) return false;
    }
  }
  return true;
}

template <Real T>
bool coefficients_are_averaging(const CoefficientField<T>& coeffs, double tol) {
  for (int y = 0; y < coeffs.height(); ++y) {
    for (int x = 0; x < coeffs.width(); ++x) {
      double sum = 0.0;
      for (T v : coeffs.at(y, x)) {
        if (v < -tol) return false;
        sum += v;
      }
      if (!(std::abs(sum - 1.0) <= tol)) return false;
    }
  }
  return true;
}

#define BURSTKERNEL_INSTANTIATE(T)                                                     \
  template std::vector<T> softmax_normalize(std::span<const T>);                       \
  template void softmax_inplace(std::span<T>, std::size_t, std::size_t, std::size_t);  \
  template void softmax_kernel_groups(KernelField<T>&);                                \
  template void softmax_basis_elements(KernelBasis<T>&);                               \
  template void softmax_coefficients(CoefficientField<T>&);                            \
  template KernelFieldReport validate_kernel_field(const KernelField<T>&, double);     \
  template bool basis_is_averaging(const KernelBasis<T>&, double);                     \
  template bool coefficients_are_averaging(const CoefficientField<T>&, double);

BURSTKERNEL_INSTANTIATE(float)
BURSTKERNEL_INSTANTIATE(double)
#undef BURSTKERNEL_INSTANTIATE

}  // namespace burstkernel
