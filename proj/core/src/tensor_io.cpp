// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "burstkernel/error.hpp"
#include "burstkernel/normalize.hpp"

namespace burstkernel {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'B', 'K', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t checked_dim(long long v) {
  if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("tensor dimension out of range");
  }
  return static_cast<std::uint32_t>(v);
}

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.dims.size() != rank) {
    throw DataError(std::string(what) + " tensor must have rank " + std::to_string(rank) +
                    ", got " + std::to_string(t.dims.size()));
  }
}

int as_int(std::uint32_t v) {
  if (v > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw DataError("tensor dimension exceeds int range");
  }
  return static_cast<int>(v);
}

template <Real T, typename Span>
std::vector<float> to_f32(const Span& values) {
  return std::vector<float>(values.begin(), values.end());
}

template <Real T, typename Span>
void copy_in(const std::vector<float>& src, Span dst) {
  std::copy(src.begin(), src.end(), dst.begin());
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      throw DataError("tensor dimension product overflows");
    }
    n *= d;
  }
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  if (tensor.data.size() != tensor.element_count()) {
    throw DataError("tensor payload does not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * tensor.dims.size() + 4 * tensor.data.size());
  for (auto ch : kMagic) out.push_back(static_cast<std::uint8_t>(ch));
  put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32(out, d);
  for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw DataError("not a BKT1 tensor (bad magic)");
  }
  const std::uint32_t rank = get_u32(bytes.data() + 4);
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
  if (rank > 64 || bytes.size() < header) throw DataError("truncated BKT1 header");
  Tensor t;
  t.dims.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i) t.dims[i] = get_u32(bytes.data() + 8 + 4 * i);
  const std::size_t count = t.element_count();
  if (count > (std::numeric_limits<std::size_t>::max() - header) / 4) {
    throw DataError("tensor dimension product overflows");
  }
  if (bytes.size() < header + 4 * count) throw DataError("truncated BKT1 payload");
  if (bytes.size() > header + 4 * count) throw DataError("trailing bytes after BKT1 payload");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + header + 4 * i));
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

template <Real T>
Tensor to_tensor(const Image<T>& image) {
  return {{checked_dim(image.height()), checked_dim(image.width()),
           checked_dim(image.channels())},
          to_f32<T>(image.values())};
}

template <Real T>
Tensor to_tensor(const Burst<T>& burst) {
  Tensor t{{checked_dim(burst.num_frames()), checked_dim(burst.height()),
            checked_dim(burst.width()), checked_dim(burst.channels())},
           {}};
  for (const auto& f : burst.frames()) {
    t.data.insert(t.data.end(), f.values().begin(), f.values().end());
  }
  return t;
}

template <Real T>
Tensor to_tensor(const KernelField<T>& field) {
  const auto& s = field.shape();
  return {{checked_dim(field.height()), checked_dim(field.width()), checked_dim(s.size),
           checked_dim(s.size), checked_dim(s.frames), checked_dim(s.groups)},
          to_f32<T>(field.weights())};
}

template <Real T>
Tensor to_tensor(const KernelBasis<T>& basis) {
  const auto& s = basis.shape();
  return {{checked_dim(s.size), checked_dim(s.size), checked_dim(s.frames),
           checked_dim(s.groups), checked_dim(basis.elements())},
          to_f32<T>(basis.values())};
}

template <Real T>
Tensor to_tensor(const CoefficientField<T>& coeffs) {
  return {{checked_dim(coeffs.height()), checked_dim(coeffs.width()),
           checked_dim(coeffs.elements())},
          to_f32<T>(coeffs.values())};
}

template <Real T>
Image<T> image_from_tensor(const Tensor& t) {
  expect_rank(t, 3, "image");
  return Image<T>(as_int(t.dims[0]), as_int(t.dims[1]), as_int(t.dims[2]),
                  std::vector<T>(t.data.begin(), t.data.end()));
}

template <Real T>
Burst<T> burst_from_tensor(const Tensor& t) {
  expect_rank(t, 4, "burst");
  const int frames = as_int(t.dims[0]);
  const int h = as_int(t.dims[1]);
  const int w = as_int(t.dims[2]);
  const int c = as_int(t.dims[3]);
  const std::size_t per = static_cast<std::size_t>(h) * w * c;
  std::vector<Image<T>> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    auto first = t.data.begin() + static_cast<std::ptrdiff_t>(f * per);
    out.emplace_back(h, w, c, std::vector<T>(first, first + static_cast<std::ptrdiff_t>(per)));
  }
  return Burst<T>(std::move(out));
}

template <Real T>
KernelField<T> kernel_field_from_tensor(const Tensor& t) {
  expect_rank(t, 6, "kernel field");
  if (t.dims[2] != t.dims[3]) throw DataError("kernel field taps must be square");
  KernelShape shape{as_int(t.dims[2]), as_int(t.dims[4]), as_int(t.dims[5])};
  if (shape.size % 2 == 0 || shape.size == 0) throw DataError("kernel size must be odd");
  KernelField<T> field(as_int(t.dims[0]), as_int(t.dims[1]), shape);
  copy_in<T>(t.data, field.weights());
  field.set_normalized(validate_kernel_field(field, 1e-5).ok());
  return field;
}

template <Real T>
KernelBasis<T> kernel_basis_from_tensor(const Tensor& t) {
  expect_rank(t, 5, "kernel basis");
  if (t.dims[0] != t.dims[1]) throw DataError("basis taps must be square");
  KernelShape shape{as_int(t.dims[0]), as_int(t.dims[2]), as_int(t.dims[3])};
  if (shape.size % 2 == 0 || shape.size == 0) throw DataError("kernel size must be odd");
  KernelBasis<T> basis(as_int(t.dims[4]), shape);
  copy_in<T>(t.data, basis.values());
  basis.set_normalized(basis_is_averaging(basis, 1e-5));
  return basis;
}

template <Real T>
CoefficientField<T> coefficients_from_tensor(const Tensor& t) {
  expect_rank(t, 3, "coefficient field");
  CoefficientField<T> coeffs(as_int(t.dims[0]), as_int(t.dims[1]), as_int(t.dims[2]));
  copy_in<T>(t.data, coeffs.values());
  coeffs.set_normalized(coefficients_are_averaging(coeffs, 1e-5));
  return coeffs;
}

#define BURSTKERNEL_INSTANTIATE(T)                                             \
  template Tensor to_tensor(const Image<T>&);                                  \
  template Tensor to_tensor(const Burst<T>&);                                  \
  template Tensor to_tensor(const KernelField<T>&);                            \
  template Tensor to_tensor(const KernelBasis<T>&);                            \
  template Tensor to_tensor(const CoefficientField<T>&);                       \
  template Image<T> image_from_tensor(const Tensor&);                          \
  template Burst<T> burst_from_tensor(const Tensor&);                          \
  template KernelField<T> kernel_field_from_tensor(const Tensor&);             \
  template KernelBasis<T> kernel_basis_from_tensor(const Tensor&);             \
  template CoefficientField<T> coefficients_from_tensor(const Tensor&);

BURSTKERNEL_INSTANTIATE(float)
BURSTKERNEL_INSTANTIATE(double)
#undef BURSTKERNEL_INSTANTIATE

}  // namespace burstkernel
