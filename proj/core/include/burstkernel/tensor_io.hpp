// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

/// Row-major float32 tensor as stored in "BKT1" containers.
///
/// File layout (all little-endian):
///   4 bytes  magic "BKT1"
///   u32      rank
///   u32      dims[rank]
///   f32      payload[prod(dims)]
///
/// Axis conventions used by the typed converters below:
///   Image            (y, x, c)
///   Burst            (t, y, x, c)
///   KernelField      (y, x, dy, dx, t, c)
///   KernelBasis      (dy, dx, t, c, b)
///   CoefficientField (y, x, b)
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
/// Throws DataError on bad magic, dimension overflow or truncation.
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

template <Real T> Tensor to_tensor(const Image<T>& image);
template <Real T> Tensor to_tensor(const Burst<T>& burst);
template <Real T> Tensor to_tensor(const KernelField<T>& field);
template <Real T> Tensor to_tensor(const KernelBasis<T>& basis);
template <Real T> Tensor to_tensor(const CoefficientField<T>& coeffs);

template <Real T> Image<T> image_from_tensor(const Tensor& tensor);
template <Real T> Burst<T> burst_from_tensor(const Tensor& tensor);
/// The normalized flag is not stored; loaders re-derive it by validation
/// at tolerance 1e-5.
template <Real T> KernelField<T> kernel_field_from_tensor(const Tensor& tensor);
template <Real T> KernelBasis<T> kernel_basis_from_tensor(const Tensor& tensor);
template <Real T> CoefficientField<T> coefficients_from_tensor(const Tensor& tensor);

}  // namespace burstkernel
