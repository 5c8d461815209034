// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <utility>

#include "burstkernel/basis.hpp"
#include "burstkernel/error.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/fourier.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/parallel.hpp"
#include "burstkernel/sim.hpp"
#include "common.hpp"

namespace burstkernel::cli {
namespace {

template <Real T>
Burst<T> random_burst(int h, int w, int c, int frames, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Image<T>> out;
  for (int t = 0; t < frames; ++t) {
    Image<T> im(h, w, c);
    for (auto& v : im.values()) v = static_cast<T>(u(rng));
    out.push_back(std::move(im));
  }
  return Burst<T>(std::move(out));
}

template <Real T>
std::pair<KernelBasis<T>, CoefficientField<T>> random_factors(int h, int w, KernelShape shape,
                                                               int elements, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  KernelBasis<T> basis(elements, shape);
  for (auto& v : basis.values()) v = static_cast<T>(n(rng));
  softmax_basis_elements(basis);
  CoefficientField<T> coeffs(h, w, elements);
  for (auto& v : coeffs.values()) v = static_cast<T>(n(rng));
  softmax_coefficients(coeffs);
  return {std::move(basis), std::move(coeffs)};
}

template <Real T>
CoefficientField<T> crop_coefficients(const CoefficientField<T>& coeffs, int y0, int x0, int h,
                                      int w) {
  CoefficientField<T> out(h, w, coeffs.elements(), coeffs.is_normalized());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto src = coeffs.at(y0 + y, x0 + x);
      std::copy(src.begin(), src.end(), out.at(y, x).begin());
    }
  }
  return out;
}

// The dense field of a full frame does not fit in memory at bench sizes, so
// the direct backend runs tile by tile over fields built once per tile shape
// before timing starts. Every tile does the full per-pixel work.
template <Real T>
class DirectTiles {
 public:
  DirectTiles(const KernelBasis<T>& basis, const CoefficientField<T>& coeffs, int tile) {
    const int h = coeffs.height();
    const int w = coeffs.width();
    for (int y0 = 0; y0 < h; y0 += tile) {
      for (int x0 = 0; x0 < w; x0 += tile) {
        const auto key = std::pair{std::min(tile, h - y0), std::min(tile, w - x0)};
        tiles_.push_back({y0, x0, key});
        if (!fields_.contains(key)) {
          fields_.emplace(key, reconstruct_kernels(
                                   basis, crop_coefficients(coeffs, y0, x0, key.first, key.second)));
        }
      }
    }
  }

  void run(const Burst<T>& noisy, Image<T>& out) const {
    for (const auto& t : tiles_) filter_direct_region(noisy, fields_.at(t.shape), t.y0, t.x0, out);
  }

 private:
  struct Tile {
    int y0;
    int x0;
    std::pair<int, int> shape;
  };
  std::vector<Tile> tiles_;
  std::map<std::pair<int, int>, KernelField<T>> fields_;
};

template <Real T>
Json run_bench(const BenchOptions& o) {
  Rng rng(o.seed);
  const Burst<T> noisy = random_burst<T>(o.height, o.width, o.channels, o.frames, rng);
  Json results = Json::array();
  for (int k : o.kernel_sizes) {
    const KernelShape shape{k, o.frames, 1};
    const auto factors = random_factors<T>(o.height, o.width, shape, o.basis_size, rng);
    const KernelBasis<T>& basis = factors.first;
    const CoefficientField<T>& coeffs = factors.second;
    for (Backend backend : o.backends) {
      std::optional<DirectTiles<T>> direct;
      if (backend == Backend::kDirect) direct.emplace(basis, coeffs, o.direct_tile);
      FourierOptions fourier;
      fourier.tile = o.tile;
      Image<T> out(o.height, o.width, o.channels);
      auto once = [&] {
        switch (backend) {
          case Backend::kDirect: direct->run(noisy, out); break;
          case Backend::kFactored: out = filter_factored(noisy, basis, coeffs); break;
          case Backend::kFourier: out = filter_fourier(noisy, basis, coeffs, fourier); break;
        }
      };
      for (int i = 0; i < o.warmup; ++i) once();
      std::vector<double> times;
      for (int i = 0; i < o.trials; ++i) {
        Stopwatch sw;
        once();
        times.push_back(sw.elapsed_ms());
      }
      std::vector<double> sorted = times;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

      const int tile = backend == Backend::kFourier ? o.tile : 0;
      Json entry = flop_report_json(
          flop_report(o.height, o.width, k, o.frames, o.basis_size, o.channels, backend, tile));
      entry["wall_time_ms"] = median;
      entry["spread_ms"] = n > 1 ? Json(sorted.back() - sorted.front()) : Json(nullptr);
      entry["trials_ms"] = times;
      if (backend == Backend::kDirect) {
        entry["direct_tile"] = o.direct_tile;
      } else {
        entry["direct_tile"] = nullptr;
      }
      results.push_back(std::move(entry));
    }
  }
  Json doc;
  doc["command"] = "bench";
  doc["version"] = kVersion;
  doc["H"] = o.height;
  doc["W"] = o.width;
  doc["T"] = o.frames;
  doc["C"] = o.channels;
  doc["B"] = o.basis_size;
  doc["tile"] = o.tile;
  doc["precision"] = o.precision;
  doc["trials"] = o.trials;
  doc["warmup"] = o.warmup;
  doc["seed"] = o.seed;
  doc["threads"] = max_threads();
  doc["results"] = results;
  return doc;
}

}  // namespace

Json bench(const BenchOptions& options) {
  if (options.height < 1 || options.width < 1) throw UsageError("bench size must be positive");
  if (options.frames < 1) throw UsageError("--frames must be >= 1");
  if (options.channels != 1 && options.channels != 3) throw UsageError("--channels must be 1 or 3");
  if (options.kernel_sizes.empty()) throw UsageError("--kernel-sizes is empty");
  for (int k : options.kernel_sizes) {
    if (k < 1 || k % 2 == 0) throw UsageError("kernel sizes must be positive and odd");
  }
  if (options.basis_size < 1) throw UsageError("--B must be >= 1");
  if (options.backends.empty()) throw UsageError("--backends is empty");
  if (options.trials < 1) throw UsageError("--trials must be >= 1");
  if (options.warmup < 0) throw UsageError("--warmup must be >= 0");
  if (options.tile < 0) throw UsageError("--tile must be >= 0");
  if (options.direct_tile < 1) throw UsageError("--direct-tile must be >= 1");
  if (options.precision == "f32") return run_bench<float>(options);
  if (options.precision == "f64") return run_bench<double>(options);
  throw UsageError("--precision must be f32 or f64");
}

}  // namespace burstkernel::cli
