// SPDX-License-Identifier: Apache-2.0
#include "burstkernel/basis.hpp"
#include "burstkernel/cluster.hpp"
#include "burstkernel/error.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/png_io.hpp"
#include "burstkernel/tensor_io.hpp"
#include "common.hpp"

namespace burstkernel::cli {
namespace {

struct Analyzed {
  KernelBasisF basis;
  KernelBasisF softmax_basis;
  int rank = 0;
  int softmax_rank = 0;
  Json entry;
};

ImageF label_image(const ClusterResult& clusters) {
  ImageF img(clusters.height, clusters.width, 1);
  const double scale = clusters.clusters > 1 ? 1.0 / (clusters.clusters - 1) : 0.0;
  for (int y = 0; y < clusters.height; ++y) {
    for (int x = 0; x < clusters.width; ++x) {
      img(y, x) = static_cast<float>(clusters.label(y, x) * scale);
    }
  }
  return img;
}

Analyzed analyze_one(const AnalyzeOptions& o, std::size_t index) {
  const fs::path& input = o.inputs[index];
  const BurstSource src = resolve_burst_source(input);
  const BurstF noisy = burst_from_tensor<float>(load_tensor(src.noisy));
  const auto params = resolve_noise(o.noise, src.metadata);
  const KernelFieldF field = estimate_field(noisy, params, o.estimator);
  const int limit = std::min(noisy.height() * noisy.width(), static_cast<int>(field.shape().taps()));
  if (o.basis_size > limit) {
    throw UsageError("--B must not exceed min(H W, K^2 T C) = " + std::to_string(limit) + " for " +
                     input.string());
  }
  auto compressed = compress_kernel_field(field, o.basis_size);

  Analyzed a;
  a.basis = compressed.basis;
  a.softmax_basis = compressed.basis;
  softmax_basis_elements(a.softmax_basis);
  a.rank = basis_rank(a.basis, o.tolerance);
  a.softmax_rank = basis_rank(a.softmax_basis, o.tolerance);

  Json entry;
  entry["input"] = input.filename().string();
  entry["H"] = noisy.height();
  entry["W"] = noisy.width();
  entry["T"] = noisy.num_frames();
  entry["C"] = noisy.channels();
  entry["rank"] = a.rank;
  entry["softmax_rank"] = a.softmax_rank;
  entry["singular_values"] = basis_singular_values(a.basis);
  entry["field_singular_values"] = compressed.singular_values;
  if (o.kmeans > 0) {
    const ClusterResult clusters =
        cluster_coefficients(compressed.coefficients, o.kmeans, o.kmeans_iters, o.seed);
    entry["wcss"] = clusters.wcss();
    entry["kmeans_iterations"] = clusters.iterations;
    if (o.labels_dir) {
      fs::create_directories(*o.labels_dir);
      const std::string name = "labels_" + std::to_string(index) + ".png";
      write_png(*o.labels_dir / name, label_image(clusters));
      entry["labels_png"] = name;
    } else {
      entry["labels_png"] = nullptr;
    }
  } else {
    entry["wcss"] = nullptr;
    entry["kmeans_iterations"] = nullptr;
    entry["labels_png"] = nullptr;
  }
  a.entry = std::move(entry);
  return a;
}

}  // namespace

Json analyze(const AnalyzeOptions& o) {
  if (o.inputs.empty()) throw UsageError("analyze needs at least one burst");
  if (o.inputs.size() < 2 && o.kmeans == 0) {
    throw UsageError("pairwise statistics need two or more bursts (or pass --kmeans)");
  }
  if (o.basis_size < 1) throw UsageError("--B must be >= 1");
  if (o.kmeans < 0) throw UsageError("--kmeans must be >= 0");
  if (o.kmeans > 256 && o.labels_dir) throw UsageError("label PNGs hold at most 256 clusters");
  if (o.kmeans_iters < 0) throw UsageError("--kmeans-iters must be >= 0");
  if (!(o.tolerance > 0.0)) throw UsageError("--tolerance must be > 0");
  check_estimator(o.estimator);
  check_noise_choice(o.noise);

  std::vector<Analyzed> items;
  items.reserve(o.inputs.size());
  for (std::size_t i = 0; i < o.inputs.size(); ++i) items.push_back(analyze_one(o, i));

  Json bursts = Json::array();
  double rank_sum = 0.0;
  for (const auto& a : items) {
    bursts.push_back(a.entry);
    rank_sum += a.rank;
  }

  Json pairs = Json::array();
  double pair_rank_sum = 0.0;
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (!(items[i].basis.shape() == items[j].basis.shape())) {
        throw DataError("bursts " + std::to_string(i) + " and " + std::to_string(j) +
                        " have different frame or channel counts");
      }
      const SubspaceOverlap raw = subspace_overlap(items[i].basis, items[j].basis, o.tolerance);
      const SubspaceOverlap soft =
          subspace_overlap(items[i].softmax_basis, items[j].softmax_basis, o.tolerance);
      pairs.push_back(Json{{"a", i},
                           {"b", j},
                           {"pair_rank", raw.pair_rank},
                           {"overlap_ratio", raw.ratio},
                           {"softmax_pair_rank", soft.pair_rank},
                           {"softmax_overlap_ratio", soft.ratio}});
      pair_rank_sum += raw.pair_rank;
      ratio_sum += raw.ratio;
    }
  }
  const double npairs = static_cast<double>(pairs.size());

  Json doc;
  doc["command"] = "analyze";
  doc["version"] = kVersion;
  doc["B"] = o.basis_size;
  doc["K"] = o.estimator.kernel_size;
  doc["estimator"] = o.estimator.estimator;
  doc["tolerance"] = o.tolerance;
  doc["kmeans"] = o.kmeans > 0 ? Json(o.kmeans) : Json(nullptr);
  doc["seed"] = o.seed;
  doc["rank"] = rank_sum / static_cast<double>(items.size());
  doc["pair_rank"] = pairs.empty() ? Json(nullptr) : Json(pair_rank_sum / npairs);
  doc["overlap_ratio"] = pairs.empty() ? Json(nullptr) : Json(ratio_sum / npairs);
  doc["singular_values"] = items.front().entry["singular_values"];
  doc["wcss"] = items.front().entry["wcss"];
  doc["bursts"] = bursts;
  doc["pairs"] = pairs;
  return doc;
}

}  // namespace burstkernel::cli
