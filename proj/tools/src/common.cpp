// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include <cmath>
#include <fstream>

#include "burstkernel/error.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/nlm.hpp"
#include "burstkernel/sim.hpp"

namespace burstkernel::cli {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumerical: return kExitNumerical;
  }
  return kExitData;
}

BurstSource resolve_burst_source(const fs::path& path) {
  BurstSource src;
  if (fs::is_directory(path)) {
    src.noisy = path / "noisy.bkt";
    if (!fs::exists(src.noisy)) throw DataError(path.string() + " has no noisy.bkt");
    if (fs::exists(path / "clean.bkt")) src.clean = path / "clean.bkt";
    if (fs::exists(path / "metadata.json")) src.metadata = path / "metadata.json";
  } else {
    if (!fs::exists(path)) throw DataError("no such file: " + path.string());
    src.noisy = path;
  }
  return src;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void check_noise_choice(const NoiseChoice& choice) {
  const bool sigma = choice.sigma_r.has_value() || choice.sigma_s.has_value();
  if (sigma && choice.gain) throw UsageError("--gain and --sigma-r/--sigma-s are exclusive");
  if (sigma && !(choice.sigma_r && choice.sigma_s)) {
    throw UsageError("--sigma-r and --sigma-s must be given together");
  }
  if (sigma && (*choice.sigma_r < 0.0 || *choice.sigma_s < 0.0 || !std::isfinite(*choice.sigma_r) ||
                !std::isfinite(*choice.sigma_s))) {
    throw UsageError("noise standard deviations must be finite and >= 0");
  }
  if (choice.gain) gain_preset(*choice.gain);  // validates the level
}

std::optional<NoiseParams> resolve_noise(const NoiseChoice& choice,
                                         const std::optional<fs::path>& metadata) {
  check_noise_choice(choice);
  if (choice.sigma_r) return NoiseParams{*choice.sigma_r, *choice.sigma_s};
  if (choice.gain) return gain_preset(*choice.gain).params();
  if (metadata) {
    const Json doc = read_json_file(*metadata);
    try {
      const auto& noise = doc.at("noise");
      return NoiseParams{noise.at("sigma_r").get<double>(), noise.at("sigma_s").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw DataError(metadata->string() + ": missing noise parameters (" + e.what() + ")");
    }
  }
  return std::nullopt;
}

Json noise_json(const NoiseParams& params) {
  auto log10_or_null = [](double v) { return v > 0.0 ? Json(std::log10(v)) : Json(nullptr); };
  return Json{{"sigma_r", params.sigma_r},
              {"sigma_s", params.sigma_s},
              {"log10_sigma_r", log10_or_null(params.sigma_r)},
              {"log10_sigma_s", log10_or_null(params.sigma_s)}};
}

void check_estimator(const EstimatorOptions& options) {
  if (options.estimator != "nlm" && options.estimator != "delta") {
    throw UsageError("unknown estimator '" + options.estimator + "' (expected nlm or delta)");
  }
  if (options.kernel_size < 1 || options.kernel_size % 2 == 0) {
    throw UsageError("--kernel-size must be a positive odd number");
  }
  if (options.patch_radius < 0) throw UsageError("--patch-radius must be >= 0");
  if (!(options.bandwidth > 0.0)) throw UsageError("--bandwidth must be > 0");
}

template <Real T>
KernelField<T> estimate_field(const Burst<T>& noisy, const std::optional<NoiseParams>& params,
                              const EstimatorOptions& options) {
  check_estimator(options);
  if (options.estimator == "delta") {
    const KernelShape shape{options.kernel_size, noisy.num_frames(),
                            options.per_channel ? noisy.channels() : 1};
    return delta_kernel_field<T>(noisy.height(), noisy.width(), shape);
  }
  if (!params) {
    throw UsageError("the nlm estimator needs noise parameters: pass --gain, --sigma-r/--sigma-s, "
                     "or a simulate directory with metadata.json");
  }
  NlmOptions nlm;
  nlm.kernel_size = options.kernel_size;
  nlm.patch_radius = options.patch_radius;
  nlm.bandwidth = options.bandwidth;
  nlm.per_channel = options.per_channel;
  return estimate_kernels_nlm(noisy, *params, nlm);
}

template KernelField<float> estimate_field(const Burst<float>&, const std::optional<NoiseParams>&,
                                           const EstimatorOptions&);
template KernelField<double> estimate_field(const Burst<double>&,
                                            const std::optional<NoiseParams>&,
                                            const EstimatorOptions&);

std::string backend_name(Backend backend) { return std::string(to_string(backend)); }

Json flop_report_json(const FlopReport& r) {
  return Json{{"backend", backend_name(r.backend)},
              {"H", r.height},
              {"W", r.width},
              {"K", r.kernel_size},
              {"T", r.frames},
              {"B", r.elements},
              {"C", r.channels},
              {"tile", r.tile},
              {"prediction_count", r.prediction_count},
              {"filter_macs", r.filter_macs},
              {"fft_flops", r.fft_flops},
              {"mixing_macs", r.mixing_macs},
              {"total_flops", r.total_flops}};
}

}  // namespace burstkernel::cli
