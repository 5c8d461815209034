// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "burstkernel/kernel_field.hpp"

namespace burstkernel {

struct ClusterResult {
  int height = 0;
  int width = 0;
  int clusters = 0;
  std::vector<int> labels;                  ///< row-major, values in [0, clusters)
  std::vector<std::vector<double>> centroids;
  std::vector<double> wcss_history;         ///< after init, then after each Lloyd iteration
  int iterations = 0;

  double wcss() const { return wcss_history.empty() ? 0.0 : wcss_history.back(); }
  int label(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Lloyd k-means over the per-pixel coefficient vectors with k-means++
/// seeding. Stops when assignments no longer change or after `max_iters`
/// iterations. Empty clusters keep their previous centroid, so the
/// within-cluster sum of squares never increases.
template <Real T>
ClusterResult cluster_coefficients(const CoefficientField<T>& coeffs, int k, int max_iters,
                                   std::uint64_t seed);

/// Sum of squared distances to the mean of each labelled group.
template <Real T>
double within_cluster_ss(const CoefficientField<T>& coeffs, const std::vector<int>& labels,
                         int k);

}  // namespace burstkernel
