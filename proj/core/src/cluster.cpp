// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/cluster.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>

#include "burstkernel/error.hpp"

namespace burstkernel {
namespace {

template <Real T>
double squared_distance(std::span<const T> a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

template <Real T>
std::span<const T> point(const CoefficientField<T>& coeffs, std::size_t p) {
  return coeffs.at(static_cast<int>(p / coeffs.width()), static_cast<int>(p % coeffs.width()));
}

}  // namespace

template <Real T>
double within_cluster_ss(const CoefficientField<T>& coeffs, const std::vector<int>& labels,
                         int k) {
  const auto dim = static_cast<std::size_t>(coeffs.elements());
  std::vector<std::vector<double>> means(static_cast<std::size_t>(k), std::vector<double>(dim));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const auto l = static_cast<std::size_t>(labels[p]);
    const auto v = point(coeffs, p);
    for (std::size_t i = 0; i < dim; ++i) means[l][i] += v[i];
    ++counts[l];
  }
  for (std::size_t l = 0; l < means.size(); ++l) {
    if (counts[l] == 0) continue;
    for (double& m : means[l]) m /= static_cast<double>(counts[l]);
  }
  double total = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    total += squared_distance(point(coeffs, p), means[static_cast<std::size_t>(labels[p])]);
  }
  return total;
}

template <Real T>
ClusterResult cluster_coefficients(const CoefficientField<T>& coeffs, int k, int max_iters,
                                   std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(coeffs.height()) * coeffs.width();
  if (k < 1) throw UsageError("k-means needs k >= 1");
  if (static_cast<std::size_t>(k) > n) {
    throw UsageError("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                     " pixels");
  }
  if (max_iters < 0) throw UsageError("iteration cap must be >= 0");
  const auto dim = static_cast<std::size_t>(coeffs.elements());

  ClusterResult result;
  result.height = coeffs.height();
  result.width = coeffs.width();
  result.clusters = k;
  result.labels.assign(n, 0);

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  auto as_vector = [&](std::size_t p) {
    const auto v = point(coeffs, p);
    return std::vector<double>(v.begin(), v.end());
  };
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  result.centroids.push_back(as_vector(pick(rng)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (result.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      nearest[p] = std::min(nearest[p], squared_distance(point(coeffs, p), result.centroids.back()));
      total += nearest[p];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        target -= nearest[chosen];
        if (target < 0.0) break;
      }
    } else {
      chosen = pick(rng);  // all points coincide with existing centroids
    }
    result.centroids.push_back(as_vector(chosen));
  }

  auto assign = [&]() {
    bool changed = false;
    double wcss = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const auto v = point(coeffs, p);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(v, result.centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.labels[p] != best) changed = true;
      result.labels[p] = best;
      wcss += best_d;
    }
    return std::pair{changed, wcss};
  };

  auto [_, initial] = assign();
  result.wcss_history.push_back(initial);

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < n; ++p) {
      const auto l = static_cast<std::size_t>(result.labels[p]);
      const auto v = point(coeffs, p);
      for (std::size_t i = 0; i < dim; ++i) sums[l][i] += v[i];
      ++counts[l];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t i = 0; i < dim; ++i) {
        result.centroids[c][i] = sums[c][i] / static_cast<double>(counts[c]);
      }
    }
    auto [changed, wcss] = assign();
    result.wcss_history.push_back(wcss);
    result.iterations = iter + 1;
    if (!changed) break;
  }
  return result;
}

template ClusterResult cluster_coefficients(const CoefficientField<float>&, int, int,
                                            std::uint64_t);
template ClusterResult cluster_coefficients(const CoefficientField<double>&, int, int,
                                            std::uint64_t);
template double within_cluster_ss(const CoefficientField<float>&, const std::vector<int>&, int);
template double within_cluster_ss(const CoefficientField<double>&, const std::vector<int>&, int);

}  // namespace burstkernel
