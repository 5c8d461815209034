// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "burstkernel/error.hpp"
#include "burstkernel/filter.hpp"

namespace burstkernel::cli {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) noexcept;

/// Full command line without the program name. Writes the command's JSON
/// document to `out`, diagnostics to `err`, and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Explicit noise description; an unset struct means "take it from metadata".
struct NoiseChoice {
  std::optional<int> gain;
  std::optional<double> sigma_r;
  std::optional<double> sigma_s;
};

struct SimulateOptions {
  std::optional<fs::path> input;  ///< PNG; a synthetic scene when absent
  fs::path out_dir;
  int height = 256;  ///< synthetic scene size before cropping
  int width = 256;
  int channels = 1;
  NoiseChoice noise;  ///< defaults to gain 1
  int frames = 8;
  int max_shift = 2;
  int jitter = 1;
  std::uint64_t seed = 0;
};

/// Writes clean.bkt, noisy.bkt, clean_reference.png, noisy_reference.png and
/// metadata.json into out_dir; returns the metadata.
Json simulate(const SimulateOptions& options);

struct EstimatorOptions {
  std::string estimator = "nlm";  ///< "nlm" or "delta"
  int kernel_size = 15;
  int patch_radius = 10;
  double bandwidth = 0.6;
  bool per_channel = false;
};

struct DenoiseOptions {
  fs::path noisy;  ///< burst tensor, or a simulate output directory
  std::optional<fs::path> clean;
  std::optional<fs::path> metadata;
  NoiseChoice noise;
  EstimatorOptions estimator;
  int basis_size = 0;  ///< 0 keeps the dense field
  bool project = false;
  Backend backend = Backend::kDirect;
  std::string precision = "f32";
  int tile = 0;
  fs::path out_dir;
  bool save_kernels = false;
};

/// Writes denoised.png, denoised.bkt and metrics.json; returns the metrics.
Json denoise(const DenoiseOptions& options);

struct BenchOptions {
  int height = 768;
  int width = 1024;
  int frames = 8;
  int channels = 1;
  std::vector<int> kernel_sizes{15};
  int basis_size = 90;
  std::vector<Backend> backends{Backend::kDirect, Backend::kFourier};
  int trials = 5;
  int warmup = 1;
  int tile = 128;
  int direct_tile = 64;
  std::string precision = "f32";
  std::uint64_t seed = 0;
};

Json bench(const BenchOptions& options);

struct AnalyzeOptions {
  std::vector<fs::path> inputs;  ///< burst tensors or simulate output directories
  NoiseChoice noise;
  EstimatorOptions estimator;
  int basis_size = 90;
  int kmeans = 0;
  int kmeans_iters = 50;
  std::uint64_t seed = 0;
  std::optional<fs::path> labels_dir;
  double tolerance = 1e-6;
};

Json analyze(const AnalyzeOptions& options);

}  // namespace burstkernel::cli
