// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "burstkernel/basis.hpp"
#include "burstkernel/error.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/fourier.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/png_io.hpp"
#include "burstkernel/tensor_io.hpp"
#include "common.hpp"

namespace burstkernel::cli {
namespace {

template <Real T>
double relative_frobenius_error(const KernelField<T>& field, const KernelField<T>& approx) {
  double num = 0.0;
  double den = 0.0;
  const auto a = field.weights();
  const auto b = approx.weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    num += d * d;
    den += static_cast<double>(a[i]) * a[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

Json report_json(const KernelFieldReport& r) {
  return Json{{"max_sum_deviation", r.max_sum_deviation},
              {"min_weight", r.min_weight},
              {"violating_pixels", r.violating_pixels}};
}

template <Real T>
Json run_denoise(const DenoiseOptions& options, const BurstSource& src) {
  const Burst<T> noisy = burst_from_tensor<T>(load_tensor(src.noisy));
  std::optional<Image<T>> clean;
  const auto clean_path = options.clean ? options.clean : src.clean;
  if (clean_path) {
    const Tensor t = load_tensor(*clean_path);
    clean = t.dims.size() == 4 ? burst_from_tensor<T>(t).reference() : image_from_tensor<T>(t);
    if (!clean->same_shape(noisy.reference())) {
      throw DataError("clean reference does not match the noisy burst");
    }
  }
  const auto metadata = options.metadata ? options.metadata : src.metadata;
  const auto params = resolve_noise(options.noise, metadata);

  Json timings;
  Stopwatch sw;
  const KernelField<T> field = estimate_field(noisy, params, options.estimator);
  timings["estimate"] = sw.elapsed_ms();

  const auto& shape = field.shape();
  const int taps = static_cast<int>(shape.taps());
  const int pixels = noisy.height() * noisy.width();
  if (options.basis_size < 0) throw UsageError("--B must be >= 0");
  if (options.basis_size > std::min(pixels, taps)) {
    throw UsageError("--B must not exceed min(H W, K^2 T C) = " +
                     std::to_string(std::min(pixels, taps)));
  }
  if (options.project && options.basis_size == 0) throw UsageError("--project needs --B");
  if (options.project && options.backend != Backend::kDirect) {
    throw UsageError("--project produces a dense field; use --backend direct");
  }
  if (options.tile != 0 && options.backend != Backend::kFourier) {
    throw UsageError("--tile only applies to the fourier backend");
  }

  Json compression = nullptr;
  std::optional<CompressedKernels<T>> factors;
  std::optional<KernelField<T>> dense;  // the field the output corresponds to
  sw = Stopwatch();
  if (options.basis_size > 0) {
    factors = compress_kernel_field(field, options.basis_size);
    KernelField<T> rec = reconstruct_kernels(factors->basis, factors->coefficients);
    compression = Json{{"B", options.basis_size},
                       {"relative_error", relative_frobenius_error(field, rec)},
                       {"singular_values", factors->singular_values},
                       {"projected", options.project}};
    dense = options.project ? project_to_averaging(rec) : std::move(rec);
  } else if (options.backend != Backend::kDirect) {
    factors = tap_decomposition(field);
  }
  timings["compress"] = sw.elapsed_ms();

  const KernelField<T>& used = dense ? *dense : field;
  sw = Stopwatch();
  Image<T> out;
  FourierOptions fourier;
  fourier.tile = options.tile;
  switch (options.backend) {
    case Backend::kDirect: out = filter_direct(noisy, used); break;
    case Backend::kFactored: out = filter_factored(noisy, factors->basis, factors->coefficients); break;
    case Backend::kFourier:
      out = filter_fourier(noisy, factors->basis, factors->coefficients, fourier);
      break;
  }
  timings["filter"] = sw.elapsed_ms();
  if (!all_finite(out)) throw NumericalError("denoised image has non-finite values");

  fs::create_directories(options.out_dir);
  write_png(options.out_dir / "denoised.png", out.template cast<float>());
  save_tensor(options.out_dir / "denoised.bkt", to_tensor(out));
  if (options.save_kernels) {
    if (options.basis_size > 0) {
      save_tensor(options.out_dir / "basis.bkt", to_tensor(factors->basis));
      save_tensor(options.out_dir / "coefficients.bkt", to_tensor(factors->coefficients));
    } else {
      save_tensor(options.out_dir / "field.bkt", to_tensor(field));
    }
  }

  const int elements = options.basis_size > 0 ? options.basis_size
                       : options.backend == Backend::kDirect ? 1
                                                             : taps;
  Json doc;
  doc["command"] = "denoise";
  doc["version"] = kVersion;
  doc["backend"] = backend_name(options.backend);
  doc["precision"] = options.precision;
  doc["estimator"] = options.estimator.estimator;
  doc["H"] = noisy.height();
  doc["W"] = noisy.width();
  doc["C"] = noisy.channels();
  doc["T"] = noisy.num_frames();
  doc["K"] = shape.size;
  doc["kernel_groups"] = shape.groups;
  doc["B"] = options.basis_size > 0 ? Json(options.basis_size) : Json(nullptr);
  doc["tile"] = options.tile;
  if (options.estimator.estimator == "nlm") {
    doc["patch_radius"] = options.estimator.patch_radius;
    doc["bandwidth"] = options.estimator.bandwidth;
  } else {
    doc["patch_radius"] = nullptr;
    doc["bandwidth"] = nullptr;
  }
  doc["noise"] = params ? noise_json(*params) : Json(nullptr);
  doc["kernel_validation"] = report_json(validate_kernel_field(field));
  doc["filtered_kernel_validation"] = report_json(validate_kernel_field(used));
  doc["compression"] = compression;
  if (clean) {
    const auto per_frame = per_frame_estimates(noisy, used);
    Json frame_psnr = Json::array();
    for (const auto& est : per_frame) frame_psnr.push_back(psnr(est, *clean));
    const LossTerms loss = loss_terms(out, *clean);
    doc["psnr"] = psnr(out, *clean);
    doc["noisy_psnr"] = psnr(noisy.reference(), *clean);
    doc["loss_terms"] = Json{{"l2_intensity", loss.l2_intensity}, {"l1_gradient", loss.l1_gradient}};
    doc["per_frame_psnr"] = frame_psnr;
  } else {
    doc["psnr"] = nullptr;
    doc["noisy_psnr"] = nullptr;
    doc["loss_terms"] = nullptr;
    doc["per_frame_psnr"] = nullptr;
  }
  doc["flops"] = flop_report_json(flop_report(noisy.height(), noisy.width(), shape.size,
                                       noisy.num_frames(), elements, noisy.channels(),
                                       options.backend, options.tile));
  doc["wall_time_ms"] = timings;
  return doc;
}

}  // namespace

Json denoise(const DenoiseOptions& options) {
  if (options.out_dir.empty()) throw UsageError("--out-dir is required");
  if (options.noisy.empty()) throw UsageError("--noisy is required");
  if (options.tile < 0) throw UsageError("--tile must be >= 0");
  check_estimator(options.estimator);
  const BurstSource src = resolve_burst_source(options.noisy);
  Json doc;
  if (options.precision == "f32") {
    doc = run_denoise<float>(options, src);
  } else if (options.precision == "f64") {
    doc = run_denoise<double>(options, src);
  } else {
    throw UsageError("--precision must be f32 or f64");
  }
  write_json_file(options.out_dir / "metrics.json", doc);
  return doc;
}

}  // namespace burstkernel::cli
