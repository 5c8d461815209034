// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/basis.hpp"

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "burstkernel/error.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/parallel.hpp"

namespace burstkernel {
namespace {

using Eigen::Index;
using MatrixXd = Eigen::MatrixXd;
template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr Index kRowBlock = 2048;

template <Real T>
RowMatrix<double> basis_matrix(const KernelBasis<T>& basis) {
  const auto taps = static_cast<Index>(basis.shape().taps());
  RowMatrix<double> a(basis.elements(), taps);
  for (Index i = 0; i < taps; ++i) {
    for (int b = 0; b < basis.elements(); ++b) a(b, i) = basis.tap(static_cast<std::size_t>(i), b);
  }
  return a;
}

std::vector<double> singular_values_of(const RowMatrix<double>& a) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  Eigen::BDCSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

int rank_from(const std::vector<double>& sv, double tol) {
  if (sv.empty() || !(sv.front() > 0.0)) return 0;
  const double cut = tol * sv.front();
  return static_cast<int>(std::count_if(sv.begin(), sv.end(), [cut](double s) { return s > cut; }));
}

// Top-`count` eigenpairs of a symmetric matrix (lower triangle referenced),
// returned in descending order. `gram` is overwritten.
void top_eigenpairs(MatrixXd& gram, int count, std::vector<double>& values, MatrixXd& vectors) {
  const auto n = static_cast<lapack_int>(gram.rows());
  std::vector<double> w(static_cast<std::size_t>(n));
  MatrixXd z(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, gram.data(), n, 0.0, 0.0,
                     n - count + 1, n, 0.0, &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != count) {
    throw NumericalError("symmetric eigen-decomposition failed (dsyevr info " +
                         std::to_string(info) + ")");
  }
  values.resize(static_cast<std::size_t>(count));
  vectors.resize(n, count);
  for (int k = 0; k < count; ++k) {
    values[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(count - 1 - k)];
    vectors.col(k) = z.col(count - 1 - k);
  }
}

}  // namespace

template <Real T>
KernelField<T> reconstruct_kernels(const KernelBasis<T>& basis,
                                   const CoefficientField<T>& coeffs) {
  if (basis.elements() != coeffs.elements()) {
    throw DataError("basis has " + std::to_string(basis.elements()) +
                    " elements but coefficients have " + std::to_string(coeffs.elements()));
  }
  const auto& shape = basis.shape();
  const std::size_t taps = shape.taps();
  const int elements = basis.elements();
  KernelField<T> field(coeffs.height(), coeffs.width(), shape,
                       basis.is_normalized() && coeffs.is_normalized());
  const T* v = basis.values().data();
  parallel_for(0, coeffs.height(), [&](std::ptrdiff_t y) {
    for (int x = 0; x < coeffs.width(); ++x) {
      const T* c = coeffs.at(static_cast<int>(y), x).data();
      T* out = field.kernel(static_cast<int>(y), x).data();
      for (std::size_t i = 0; i < taps; ++i) {
        const T* row = v + i * elements;
        T acc = 0;
        for (int b = 0; b < elements; ++b) acc += row[b] * c[b];
        out[i] = acc;
      }
    }
  });
  return field;
}

template <Real T>
CompressedKernels<T> compress_kernel_field(const KernelField<T>& field, int elements) {
  const Index n = static_cast<Index>(field.height()) * field.width();
  const auto d = static_cast<Index>(field.shape().taps());
  if (elements < 1 || elements > std::min(n, d)) {
    throw UsageError("basis size must lie in [1, min(HW, K^2 T C)] = [1, " +
                     std::to_string(std::min(n, d)) + "], got " + std::to_string(elements));
  }
  Eigen::Map<const RowMatrix<T>> m(field.weights().data(), n, d);
  const bool tall = n >= d;

  std::vector<double> eigenvalues;
  MatrixXd vectors;
  MatrixXd right(d, elements);         // V_B
  RowMatrix<double> left(n, elements);  // U_B S_B

  if (tall) {
    MatrixXd gram = MatrixXd::Zero(d, d);
    for (Index r0 = 0; r0 < n; r0 += kRowBlock) {
      const Index rows = std::min(kRowBlock, n - r0);
      const MatrixXd block = m.middleRows(r0, rows).template cast<double>();
      gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    }
    top_eigenpairs(gram, elements, eigenvalues, vectors);
    right = vectors;
    for (Index r0 = 0; r0 < n; r0 += kRowBlock) {
      const Index rows = std::min(kRowBlock, n - r0);
      left.middleRows(r0, rows) = m.middleRows(r0, rows).template cast<double>() * right;
    }
  } else {
    const MatrixXd md = m.template cast<double>();
    MatrixXd gram = MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(md);
    top_eigenpairs(gram, elements, eigenvalues, vectors);
    for (int b = 0; b < elements; ++b) {
      const double sigma = std::sqrt(std::max(eigenvalues[static_cast<std::size_t>(b)], 0.0));
      if (sigma > 0.0) {
        right.col(b) = md.transpose() * vectors.col(b) / sigma;
        left.col(b) = vectors.col(b) * sigma;
      } else {
        right.col(b).setZero();
        left.col(b).setZero();
      }
    }
  }

  // Deterministic signs: the largest-magnitude tap of each element is positive.
  for (int b = 0; b < elements; ++b) {
    Index arg = 0;
    right.col(b).cwiseAbs().maxCoeff(&arg);
    if (right(arg, b) < 0.0) {
      right.col(b) = -right.col(b);
      left.col(b) = -left.col(b);
    }
  }

  CompressedKernels<T> out{KernelBasis<T>(elements, field.shape(), false),
                           CoefficientField<T>(field.height(), field.width(), elements, false),
                           {}};
  for (Index i = 0; i < d; ++i) {
    for (int b = 0; b < elements; ++b) {
      out.basis.tap(static_cast<std::size_t>(i), b) = static_cast<T>(right(i, b));
    }
  }
  auto coeff = out.coefficients.values();
  for (Index p = 0; p < n; ++p) {
    for (int b = 0; b < elements; ++b) {
      coeff[static_cast<std::size_t>(p) * elements + b] = static_cast<T>(left(p, b));
    }
  }
  out.singular_values.reserve(eigenvalues.size());
  for (double e : eigenvalues) out.singular_values.push_back(std::sqrt(std::max(e, 0.0)));
  return out;
}

template <Real T>
CompressedKernels<T> tap_decomposition(const KernelField<T>& field) {
  const auto taps = static_cast<int>(field.shape().taps());
  CompressedKernels<T> out{KernelBasis<T>(taps, field.shape(), false),
                           CoefficientField<T>(field.height(), field.width(), taps, false),
                           {}};
  for (int i = 0; i < taps; ++i) out.basis.tap(static_cast<std::size_t>(i), i) = T(1);
  std::copy(field.weights().begin(), field.weights().end(), out.coefficients.values().begin());
  return out;
}

template <Real T>
KernelField<T> project_to_averaging(const KernelField<T>& field) {
  KernelField<T> out = field;
  const auto& shape = field.shape();
  const auto groups = static_cast<std::size_t>(shape.groups);
  const std::size_t per_group = shape.taps_per_group();
  const std::size_t center = shape.tap_index(shape.radius(), shape.radius(), 0, 0);
  parallel_for(0, field.height(), [&](std::ptrdiff_t y) {
    for (int x = 0; x < field.width(); ++x) {
      auto k = out.kernel(static_cast<int>(y), x);
      for (std::size_t c = 0; c < groups; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < per_group; ++i) {
          T& v = k[c + i * groups];
          v = std::max(v, T(0));
          sum += v;
        }
        if (sum > 0.0) {
          for (std::size_t i = 0; i < per_group; ++i) {
            T& v = k[c + i * groups];
            v = static_cast<T>(v / sum);
          }
        } else {
          k[center + c] = T(1);
        }
      }
    }
  });
  out.set_normalized(true);
  return out;
}

template <Real T>
std::vector<double> basis_singular_values(const KernelBasis<T>& basis) {
  return singular_values_of(basis_matrix(basis));
}

template <Real T>
int basis_rank(const KernelBasis<T>& basis, double tol) {
  return rank_from(basis_singular_values(basis), tol);
}

template <Real T>
SubspaceOverlap subspace_overlap(const KernelBasis<T>& a, const KernelBasis<T>& b,
                                 double tol) {
  if (!(a.shape() == b.shape())) {
    throw DataError("bases must share kernel size, frame count and channel groups");
  }
  SubspaceOverlap out;
  out.rank_a = basis_rank(a, tol);
  out.rank_b = basis_rank(b, tol);
  const auto ma = basis_matrix(a);
  const auto mb = basis_matrix(b);
  RowMatrix<double> stacked(ma.rows() + mb.rows(), ma.cols());
  stacked << ma, mb;
  out.pair_rank = rank_from(singular_values_of(stacked), tol);
  const int total = out.rank_a + out.rank_b;
  out.ratio = total == 0 ? 0.0 : 1.0 - static_cast<double>(out.pair_rank) / total;
  return out;
}

template <Real T>
double overlap_ratio(const KernelBasis<T>& a, const KernelBasis<T>& b, double tol) {
  return subspace_overlap(a, b, tol).ratio;
}

#define BURSTKERNEL_INSTANTIATE(T)                                                          \
  template KernelField<T> reconstruct_kernels(const KernelBasis<T>&,                        \
                                              const CoefficientField<T>&);                  \
  template CompressedKernels<T> compress_kernel_field(const KernelField<T>&, int);          \
  template CompressedKernels<T> tap_decomposition(const KernelField<T>&);                   \
  template KernelField<T> project_to_averaging(const KernelField<T>&);                      \
  template std::vector<double> basis_singular_values(const KernelBasis<T>&);                \
  template int basis_rank(const KernelBasis<T>&, double);                                   \
  template SubspaceOverlap subspace_overlap(const KernelBasis<T>&, const KernelBasis<T>&,   \
                                            double);                                        \
  template double overlap_ratio(const KernelBasis<T>&, const KernelBasis<T>&, double);

BURSTKERNEL_INSTANTIATE(float)
BURSTKERNEL_INSTANTIATE(double)
#undef BURSTKERNEL_INSTANTIATE

}  // namespace burstkernel
