// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "burstkernel/basis.hpp"
#include "burstkernel/cli/commands.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/fourier.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/nlm.hpp"
#include "burstkernel/sim.hpp"
#include "oracles.hpp"

namespace bk = burstkernel;
using bk::testing::TestRng;

namespace {

// Tolerances and sample sizes.
constexpr int kEquivalenceCases = 108;
constexpr double kEquivalenceTolF32 = 1e-4;
constexpr double kEquivalenceTolF64 = 1e-9;
constexpr double kEquivalenceBudgetSeconds = 120.0;
constexpr int kOracleCases = 20;
constexpr double kOracleTol = 1e-10;
constexpr long kNoiseSamples = 1'000'000;
constexpr double kNoiseVarianceRelTol = 0.02;
constexpr double kNoiseMeanStdErrs = 3.0;
constexpr int kDenoiseBursts = 20;
constexpr double kDenoiseWinFraction = 0.95;
constexpr double kCompressionLossDb = 0.1;
constexpr double kEckartYoungRelTol = 1e-6;
constexpr double kExactRankRelTol = 1e-5;
constexpr int kOverlapSamples = 200;
constexpr int kIdentityCases = 20;
constexpr double kIdentityTol = 1e-10;
constexpr int kScalingTrials = 5;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double frob2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double frob2_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

template <bk::Real T>
double three_way_diff(const bk::BurstD& burst, const bk::KernelBasisD& basis,
                      const bk::CoefficientFieldD& coeffs, int tile) {
  const auto b = burst.cast<T>();
  const auto v = basis.cast<T>();
  const auto c = coeffs.cast<T>();
  bk::FourierOptions fo;
  fo.tile = tile;
  const auto direct = bk::filter_direct(b, bk::reconstruct_kernels(v, c));
  const auto factored = bk::filter_factored(b, v, c);
  const auto fourier = bk::filter_fourier(b, v, c, fo);
  return std::max({bk::testing::max_abs_diff(direct, factored),
                   bk::testing::max_abs_diff(direct, fourier),
                   bk::testing::max_abs_diff(factored, fourier)});
}

Outcome backend_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  TestRng rng(101);
  std::uniform_int_distribution<int> size(1, 64);
  const int ks[] = {3, 5, 15};
  const int ts[] = {2, 8};
  const int bs[] = {1, 4, 90};
  const int cs[] = {1, 3};
  double worst32 = 0.0;
  double worst64 = 0.0;
  int n = 0;
  while (n < kEquivalenceCases) {
    for (int k : ks)
      for (int t : ts)
        for (int b : bs)
          for (int c : cs) {
            if (n == kEquivalenceCases) continue;
            const int h = size(rng);
            const int w = size(rng);
            const int groups = (c == 3 && n % 2 == 1) ? 3 : 1;
            const bk::KernelShape shape{k, t, groups};
            const auto burst = bk::testing::random_burst(h, w, c, t, rng);
            const auto basis = bk::testing::random_basis(b, shape, rng);
            const auto coeffs = bk::testing::random_coefficients(h, w, b, rng);
            const int tile = n % 3 == 0 ? 16 : 0;
            worst32 = std::max(worst32, three_way_diff<float>(burst, basis, coeffs, tile));
            worst64 = std::max(worst64, three_way_diff<double>(burst, basis, coeffs, tile));
            ++n;
          }
  }
  const double elapsed = seconds_since(start);
  return {worst32 <= kEquivalenceTolF32 && worst64 <= kEquivalenceTolF64 &&
              elapsed < kEquivalenceBudgetSeconds,
          fmt("%d cases, max diff f32 %.3g (<= %.0e), f64 %.3g (<= %.0e), %.1f s (< %.0f s)", n,
              worst32, kEquivalenceTolF32, worst64, kEquivalenceTolF64, elapsed,
              kEquivalenceBudgetSeconds)};
}

Outcome brute_force_oracle() {
  TestRng rng(202);
  std::uniform_int_distribution<int> size(1, 12);
  double worst = 0.0;
  for (int i = 0; i < kOracleCases; ++i) {
    const int c = i % 2 == 0 ? 1 : 3;
    const bk::KernelShape shape{1 + 2 * (i % 4), 1 + i % 3, c == 3 && i % 4 == 1 ? 3 : 1};
    const int h = size(rng);
    const int w = size(rng);
    const auto burst = bk::testing::random_burst(h, w, c, shape.frames, rng);
    const auto field = bk::testing::random_field(h, w, shape, rng, i % 2 == 0);
    worst = std::max(worst, bk::testing::max_abs_diff(bk::filter_direct(burst, field),
                                                      bk::testing::naive_filter(burst, field)));
  }
  return {worst <= kOracleTol,
          fmt("%d cases, max diff %.3g (<= %.0e)", kOracleCases, worst, kOracleTol)};
}

Outcome noise_model() {
  const double xs[] = {0.0, 0.25, 0.5, 1.0};
  double worst_rel = 0.0;
  double worst_z = 0.0;
  for (const auto& preset : bk::gain_presets()) {
    const auto p = preset.params();
    for (double x : xs) {
      bk::ImageD flat(1000, static_cast<int>(kNoiseSamples / 1000), 1, x);
      bk::Rng rng(static_cast<std::uint64_t>(preset.level * 1000 + std::lround(x * 100)));
      const auto noisy = bk::add_noise(bk::BurstD({flat}), p, rng);
      double sum = 0.0;
      double sq = 0.0;
      for (double v : noisy.reference().values()) {
        sum += v - x;
        sq += (v - x) * (v - x);
      }
      const double n = static_cast<double>(kNoiseSamples);
      const double mean = sum / n;
      const double var = sq / n - mean * mean;
      const double expected = p.sigma_r * p.sigma_r + p.sigma_s * p.sigma_s * x;
      worst_rel = std::max(worst_rel, std::abs(var - expected) / expected);
      worst_z = std::max(worst_z, std::abs(mean) / std::sqrt(expected / n));
    }
  }
  return {worst_rel <= kNoiseVarianceRelTol && worst_z <= kNoiseMeanStdErrs,
          fmt("4 gains x 4 levels x %ld samples, worst variance error %.3f%% (<= %.0f%%), worst "
              "|mean| %.2f SE (<= %.0f)",
              kNoiseSamples, 100.0 * worst_rel, 100.0 * kNoiseVarianceRelTol, worst_z,
              kNoiseMeanStdErrs)};
}

Outcome denoising() {
  int wins = 0;
  double worst_loss = -INFINITY;
  for (int i = 0; i < kDenoiseBursts; ++i) {
    const int gain = 1 << (i % 4);
    bk::Rng rng(2024 + static_cast<std::uint64_t>(i));
    const auto scene = bk::make_synthetic_scene<float>(52, 52, 1, rng);
    bk::MotionConfig motion;
    motion.max_shift = 2;
    const auto mb = bk::synth_motion(scene, 8, motion, rng);
    const auto params = bk::gain_preset(gain).params();
    const auto noisy = bk::add_noise(mb.burst, params, rng);
    bk::NlmOptions nlm;
    nlm.kernel_size = 15;
    const auto field = bk::estimate_kernels_nlm(noisy, params, nlm);
    const auto compressed = bk::compress_kernel_field(field, 90);
    const auto& clean = mb.burst.reference();
    const double noisy_psnr = bk::psnr(noisy.reference(), clean);
    const double full = bk::psnr(bk::filter_direct(noisy, field), clean);
    const double comp =
        bk::psnr(bk::filter_fourier(noisy, compressed.basis, compressed.coefficients), clean);
    wins += full > noisy_psnr ? 1 : 0;
    worst_loss = std::max(worst_loss, full - comp);
  }
  const double fraction = static_cast<double>(wins) / kDenoiseBursts;
  return {fraction >= kDenoiseWinFraction && worst_loss <= kCompressionLossDb,
          fmt("%d/%d bursts beat the noisy reference (>= %.0f%%), worst B=90 loss %.3f dB "
              "(<= %.1f)",
              wins, kDenoiseBursts, 100.0 * kDenoiseWinFraction, worst_loss, kCompressionLossDb)};
}

Outcome compression_optimality() {
  TestRng rng(505);
  double worst_tail = 0.0;
  double worst_exact = 0.0;
  for (int i = 0; i < 10; ++i) {
    const bk::KernelShape shape{3 + 2 * (i % 2), 1 + i % 3, 1};
    const auto field = bk::testing::random_field(6 + i, 5 + i, shape, rng, i % 2 == 0);
    const auto sv = bk::testing::jacobi_singular_values(field);
    for (int b : {1, 3, 8}) {
      const auto c = bk::compress_kernel_field(field, b);
      const auto rec = bk::reconstruct_kernels(c.basis, c.coefficients);
      double tail = 0.0;
      for (std::size_t j = static_cast<std::size_t>(b); j < sv.size(); ++j) tail += sv[j] * sv[j];
      const double err = std::sqrt(frob2_diff(field.weights(), rec.weights()));
      worst_tail = std::max(worst_tail, std::abs(err - std::sqrt(tail)) / std::sqrt(tail));
    }
    const int rank = 1 + i % 6;
    const auto exact = bk::reconstruct_kernels(
        bk::testing::random_basis(rank, shape, rng, false),
        bk::testing::random_coefficients(6 + i, 5 + i, rank, rng, false));
    const auto c = bk::compress_kernel_field(exact, rank);
    const auto rec = bk::reconstruct_kernels(c.basis, c.coefficients);
    worst_exact = std::max(
        worst_exact, std::sqrt(frob2_diff(exact.weights(), rec.weights()) / frob2(exact.weights())));
  }
  return {worst_tail <= kEckartYoungRelTol && worst_exact <= kExactRankRelTol,
          fmt("tail mismatch %.3g (<= %.0e), exact-rank error %.3g (<= %.0e)", worst_tail,
              kEckartYoungRelTol, worst_exact, kExactRankRelTol)};
}

bk::KernelBasisD basis_from_rows(const Eigen::MatrixXd& rows, bk::KernelShape shape) {
  bk::KernelBasisD basis(static_cast<int>(rows.rows()), shape);
  for (Eigen::Index b = 0; b < rows.rows(); ++b)
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      basis.tap(static_cast<std::size_t>(j), static_cast<int>(b)) = rows(b, j);
  return basis;
}

Outcome subspace_analysis() {
  TestRng rng(606);
  bool identical_ok = true;
  bool complement_ok = true;
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 10; ++i) {
    const bk::KernelShape shape{3 + 2 * (i % 2), 1 + i % 2, 1};
    const auto taps = static_cast<Eigen::Index>(shape.taps());
    const auto basis = bk::testing::random_basis(1 + i % 9, shape, rng, i % 2 == 0);
    identical_ok = identical_ok && bk::overlap_ratio(basis, basis) == 0.5;
    Eigen::MatrixXd random = Eigen::MatrixXd::NullaryExpr(taps, taps, [&] {
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    });
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random).householderQ();
    const Eigen::Index split = 1 + i % (taps - 1);
    complement_ok = complement_ok && bk::overlap_ratio(basis_from_rows(q.topRows(split), shape),
                                                       basis_from_rows(q.bottomRows(taps - split),
                                                                       shape)) == 0.0;
  }
  std::uniform_int_distribution<int> elems(1, 30);
  for (int i = 0; i < kOverlapSamples; ++i) {
    const bk::KernelShape shape{3, 1 + i % 3, 1};
    const auto a = bk::testing::random_basis(elems(rng), shape, rng, i % 2 == 0);
    auto b = bk::testing::random_basis(elems(rng), shape, rng, i % 2 == 0);
    for (int e = 0; e < std::min(a.elements(), b.elements()) && i % 3 == 0; e += 2) {
      b.set_element(e, a.element(e));
    }
    const double r = bk::overlap_ratio(a, b);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {identical_ok && complement_ok && lo >= 0.0 && hi <= 0.5,
          fmt("identical = 0.5: %s, complements = 0: %s, %d sampled ratios in [%.3f, %.3f]",
              identical_ok ? "yes" : "no", complement_ok ? "yes" : "no", kOverlapSamples, lo, hi)};
}

Outcome cost_accounting() {
  const auto basis = bk::prediction_count(128, 128, 15, 8, 90, bk::PredictionMode::kBasis);
  const auto kpn = bk::prediction_count(128, 128, 15, 8, 90, bk::PredictionMode::kKpn);
  bool ok = basis == 1636560u && kpn == 29491200u;
  int checked = 0;
  for (int hw : {16, 128, 333})
    for (int k : {3, 15})
      for (int t : {1, 8})
        for (int b : {1, 90}) {
          const auto h = static_cast<std::uint64_t>(hw);
          ok = ok && bk::prediction_count(hw, hw + 1, k, t, b, bk::PredictionMode::kBasis) ==
                         h * (h + 1) * b + static_cast<std::uint64_t>(k * k * t * b);
          ok = ok && bk::prediction_count(hw, hw + 1, k, t, b, bk::PredictionMode::kKpn) ==
                         h * (h + 1) * static_cast<std::uint64_t>(k * k * t);
          for (auto backend : {bk::Backend::kDirect, bk::Backend::kFactored, bk::Backend::kFourier})
            for (int c : {1, 3})
              for (int tile : {0, 128}) {
                const auto r = bk::flop_report(hw, hw + 1, k, t, b, c, backend, tile);
                const auto o = bk::testing::flop_oracle(hw, hw + 1, k, t, b, c, backend, tile);
                ok = ok && r.filter_macs == o.filter_macs && r.mixing_macs == o.mixing_macs &&
                     r.fft_flops == o.fft_flops && r.total_flops == o.total_flops;
                ++checked;
              }
        }
  return {ok, fmt("128x128 K=15 T=8 B=90: %llu vs %llu predictions; %d flop reports equal to the "
                  "re-evaluated model",
                  static_cast<unsigned long long>(basis), static_cast<unsigned long long>(kpn),
                  checked)};
}

Outcome scaling_shape() {
  bk::cli::BenchOptions o;
  o.height = 768;
  o.width = 1024;
  o.frames = 8;
  o.basis_size = 90;
  o.kernel_sizes = {7, 31};
  o.backends = {bk::Backend::kDirect, bk::Backend::kFourier};
  o.trials = kScalingTrials;
  o.warmup = 1;
  const auto doc = bk::cli::bench(o);
  double direct7 = 0, direct31 = 0, fourier7 = 0, fourier31 = 0;
  for (const auto& r : doc["results"]) {
    const bool direct = r["backend"] == "direct";
    const double ms = r["wall_time_ms"].get<double>();
    (r["K"] == 7 ? (direct ? direct7 : fourier7) : (direct ? direct31 : fourier31)) = ms;
  }
  const double dr = direct31 / direct7;
  const double fr = fourier31 / fourier7;
  return {dr > fr, fmt("1024x768 T=8 B=90, median of %d: direct K31/K7 = %.0f/%.0f ms = %.2f, "
                       "fourier K31/K7 = %.0f/%.0f ms = %.2f",
                       kScalingTrials, direct31, direct7, dr, fourier31, fourier7, fr)};
}

Outcome identity_property() {
  TestRng rng(909);
  std::uniform_int_distribution<int> size(1, 16);
  double worst = 0.0;
  for (int i = 0; i < kIdentityCases; ++i) {
    const int c = i % 2 == 0 ? 1 : 3;
    const bk::KernelShape shape{1 + 2 * (i % 4), 1 + i % 8, c == 3 && i % 4 == 3 ? 3 : 1};
    const int h = size(rng);
    const int w = size(rng);
    const auto burst = bk::testing::random_burst(h, w, c, shape.frames, rng);
    const auto field = bk::testing::random_field(h, w, shape, rng, i % 3 != 0);
    const auto estimates = bk::per_frame_estimates(burst, field);
    bk::ImageD mean(h, w, c);
    for (const auto& e : estimates)
      for (std::size_t j = 0; j < mean.size(); ++j) mean.values()[j] += e.values()[j];
    for (auto& v : mean.values()) v /= shape.frames;
    worst = std::max(worst, bk::testing::max_abs_diff(mean, bk::filter_direct(burst, field)));
  }
  return {worst <= kIdentityTol,
          fmt("%d cases, max diff %.3g (<= %.0e)", kIdentityCases, worst, kIdentityTol)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"backend equivalence", backend_equivalence},
      {"brute-force oracle", brute_force_oracle},
      {"noise model", noise_model},
      {"denoising", denoising},
      {"compression optimality", compression_optimality},
      {"subspace analysis", subspace_analysis},
      {"cost accounting", cost_accounting},
      {"scaling shape", scaling_shape},
      {"identity property", identity_property},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", index++, name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
