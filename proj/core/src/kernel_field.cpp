// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/kernel_field.hpp"

#include <string>

#include "burstkernel/error.hpp"

namespace burstkernel {

void KernelShape::validate() const {
  if (size < 1 || size % 2 == 0) {
    throw UsageError("kernel size must be a positive odd number, got " +
                     std::to_string(size));
  }
  if (frames < 1) throw UsageError("kernel needs at least one frame");
  if (groups < 1) throw UsageError("kernel needs at least one channel group");
}

template <Real T>
KernelField<T>::KernelField(int height, int width, KernelShape shape, bool normalized)
    : height_(height), width_(width), shape_(shape), normalized_(normalized) {
  shape_.validate();
  if (height < 0 || width < 0) throw UsageError("kernel field dimensions must be >= 0");
  weights_.assign(static_cast<std::size_t>(height) * width * shape_.taps(), T(0));
}

template <Real T>
KernelBasis<T>::KernelBasis(int elements, KernelShape shape, bool normalized)
    : elements_(elements), shape_(shape), normalized_(normalized) {
  shape_.validate();
  if (elements < 0) throw UsageError("basis size must be >= 0");
  values_.assign(shape_.taps() * static_cast<std::size_t>(elements), T(0));
}

template <Real T>
std::vector<T> KernelBasis<T>::element(int b) const {
  std::vector<T> out(shape_.taps());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = tap(i, b);
  return out;
}

template <Real T>
void KernelBasis<T>::set_element(int b, std::span<const T> taps) {
  if (taps.size() != shape_.taps()) throw DataError("basis element length mismatch");
  for (std::size_t i = 0; i < taps.size(); ++i) tap(i, b) = taps[i];
}

template <Real T>
CoefficientField<T>::CoefficientField(int height, int width, int elements, bool normalized)
    : height_(height), width_(width), elements_(elements), normalized_(normalized) {
  if (height < 0 || width < 0 || elements < 0) {
    throw UsageError("coefficient field dimensions must be >= 0");
  }
  values_.assign(static_cast<std::size_t>(height) * width * elements, T(0));
}

template class KernelField<float>;
template class KernelField<double>;
template class KernelBasis<float>;
template class KernelBasis<double>;
template class CoefficientField<float>;
template class CoefficientField<double>;

}  // namespace burstkernel
