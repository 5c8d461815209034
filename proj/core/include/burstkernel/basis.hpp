// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

/// Relative singular-value threshold used for numerical rank.
inline constexpr double kRankTolerance = 1e-6;

/// w_n[d, t, c] = sum_b v[d, t, c, b] * c_n[b]. The output is flagged
/// normalized when both inputs are (a convex combination of averaging
/// kernels is an averaging kernel).
template <Real T>
KernelField<T> reconstruct_kernels(const KernelBasis<T>& basis,
                                   const CoefficientField<T>& coeffs);

template <Real T>
struct CompressedKernels {
  KernelBasis<T> basis;
  CoefficientField<T> coefficients;
  /// Leading singular values of the (HW) x (K^2 T C) field matrix, descending.
  std::vector<double> singular_values;
};

/// Rank-B truncated SVD of the field matrix M = U S V^T: the basis holds the
/// B leading right singular vectors and the coefficients are U_B S_B, so the
/// reconstruction is the best rank-B Frobenius approximation of M. Outputs
/// are not normalized and may hold negative weights. Computed in double
/// precision from the eigen-decomposition of the smaller Gram matrix.
template <Real T>
CompressedKernels<T> compress_kernel_field(const KernelField<T>& field, int elements);

/// Lossless factorization with one basis element per tap: element i is the
/// one-hot kernel e_i and the coefficients are the field weights themselves.
template <Real T>
CompressedKernels<T> tap_decomposition(const KernelField<T>& field);

/// Clamps negative weights to zero and rescales each (pixel, group) kernel to
/// unit sum; an all-zero kernel becomes the reference-frame delta.
template <Real T>
KernelField<T> project_to_averaging(const KernelField<T>& field);

/// Singular values (descending) of the B x (K^2 T C) basis matrix.
template <Real T>
std::vector<double> basis_singular_values(const KernelBasis<T>& basis);

/// Number of singular values above tol * sigma_max.
template <Real T>
int basis_rank(const KernelBasis<T>& basis, double tol = kRankTolerance);

struct SubspaceOverlap {
  int rank_a = 0;
  int rank_b = 0;
  int pair_rank = 0;  ///< rank of the stacked 2B-row matrix
  double ratio = 0.0;  ///< 1 - pair_rank / (rank_a + rank_b)
};

template <Real T>
SubspaceOverlap subspace_overlap(const KernelBasis<T>& a, const KernelBasis<T>& b,
                                 double tol = kRankTolerance);

template <Real T>
double overlap_ratio(const KernelBasis<T>& a, const KernelBasis<T>& b,
                     double tol = kRankTolerance);

}  // namespace burstkernel
