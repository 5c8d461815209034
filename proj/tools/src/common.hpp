// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "burstkernel/cli/commands.hpp"
#include "burstkernel/image.hpp"
#include "burstkernel/kernel_field.hpp"
#include "burstkernel/metrics.hpp"

namespace burstkernel::cli {

inline constexpr const char* kVersion = "0.1.0";

/// A burst argument: a tensor file, or a simulate output directory whose
/// noisy.bkt / clean.bkt / metadata.json are picked up automatically.
struct BurstSource {
  fs::path noisy;
  std::optional<fs::path> clean;
  std::optional<fs::path> metadata;
};

BurstSource resolve_burst_source(const fs::path& path);

Json read_json_file(const fs::path& path);
void write_json_file(const fs::path& path, const Json& doc);

/// Explicit sigmas win over an explicit gain, which wins over metadata.
/// Returns nullopt when nothing is available.
std::optional<NoiseParams> resolve_noise(const NoiseChoice& choice,
                                         const std::optional<fs::path>& metadata);
/// gain and sigma flags are mutually exclusive, sigmas come in pairs.
void check_noise_choice(const NoiseChoice& choice);

Json noise_json(const NoiseParams& params);
void check_estimator(const EstimatorOptions& options);

template <Real T>
KernelField<T> estimate_field(const Burst<T>& noisy, const std::optional<NoiseParams>& params,
                              const EstimatorOptions& options);

std::string backend_name(Backend backend);

Json flop_report_json(const FlopReport& report);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace burstkernel::cli
