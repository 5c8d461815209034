// SPDX-License-Identifier: Apache-2.0
// Randomized invariants across modules.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "burstkernel/basis.hpp"
#include "burstkernel/filter.hpp"
#include "burstkernel/fourier.hpp"
#include "burstkernel/metrics.hpp"
#include "burstkernel/normalize.hpp"
#include "burstkernel/sim.hpp"
#include "burstkernel/tensor_io.hpp"
#include "oracles.hpp"

namespace bk = burstkernel;
using bk::testing::TestRng;

namespace {

double relative_error(const bk::KernelFieldD& f, const bk::KernelFieldD& g) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.weights().size(); ++i) {
    const double d = f.weights()[i] - g.weights()[i];
    num += d * d;
    den += f.weights()[i] * f.weights()[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(Property, SoftmaxShiftInvariance) {
  TestRng rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(1 + trial % 40));
    for (auto& x : v) x = n(rng);
    const double shift = n(rng) * 100.0;
    auto w = v;
    for (auto& x : w) x += shift;
    const auto a = bk::softmax_normalize<double>(v);
    const auto b = bk::softmax_normalize<double>(w);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Property, NormalizedConstructionsValidate) {
  TestRng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const bk::KernelShape shape{1 + 2 * (trial % 4), 1 + trial % 3, trial % 2 == 0 ? 1 : 3};
    auto logits = bk::testing::random_field(4, 3, shape, rng, false);
    for (auto& v : logits.weights()) v *= 20.0;
    bk::softmax_kernel_groups(logits);
    ASSERT_TRUE(bk::validate_kernel_field(logits).ok());
    const auto basis = bk::testing::random_basis(5, shape, rng);
    const auto coeffs = bk::testing::random_coefficients(4, 3, 5, rng);
    const auto rec = bk::reconstruct_kernels(basis, coeffs);
    const auto report = bk::validate_kernel_field(rec);
    ASSERT_TRUE(report.ok());
    ASSERT_GE(report.min_weight, -1e-7);
    ASSERT_LE(report.max_sum_deviation, 1e-5);
    ASSERT_TRUE(bk::validate_kernel_field(bk::project_to_averaging(
                    bk::testing::random_field(4, 3, shape, rng, false)))
                    .ok());
  }
}

TEST(Property, TensorRoundTripIsIdentity) {
  TestRng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const bk::KernelShape shape{1 + 2 * (trial % 3), 1 + trial % 4, trial % 2 == 0 ? 1 : 3};
    const int h = 1 + trial % 5, w = 1 + trial % 7, c = trial % 2 == 0 ? 1 : 3;
    const auto img = bk::testing::random_image(h, w, c, rng).cast<float>();
    ASSERT_EQ(bk::image_from_tensor<float>(bk::decode_tensor(bk::encode_tensor(bk::to_tensor(img)))),
              img);
    const auto burst = bk::testing::random_burst(h, w, c, shape.frames, rng).cast<float>();
    ASSERT_EQ(bk::burst_from_tensor<float>(bk::decode_tensor(bk::encode_tensor(bk::to_tensor(burst)))),
              burst);
    const auto field = bk::testing::random_field(h, w, shape, rng, trial % 3 == 0).cast<float>();
    const auto f2 = bk::kernel_field_from_tensor<float>(bk::decode_tensor(bk::encode_tensor(bk::to_tensor(field))));
    ASSERT_TRUE(std::equal(f2.weights().begin(), f2.weights().end(), field.weights().begin()));
    ASSERT_EQ(f2.shape(), field.shape());
    const auto basis = bk::testing::random_basis(1 + trial % 4, shape, rng, false).cast<float>();
    ASSERT_EQ(bk::kernel_basis_from_tensor<float>(bk::decode_tensor(bk::encode_tensor(bk::to_tensor(basis)))),
              basis);
    const auto coeffs = bk::testing::random_coefficients(h, w, 1 + trial % 4, rng, false).cast<float>();
    ASSERT_EQ(bk::coefficients_from_tensor<float>(bk::decode_tensor(bk::encode_tensor(bk::to_tensor(coeffs)))),
              coeffs);
  }
}

TEST(Property, NoiseIsZeroMean) {
  bk::ImageD clean(250, 250);
  TestRng trng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : clean.values()) v = u(trng);
  const bk::BurstD burst(std::vector<bk::ImageD>(16, clean));
  for (int level : {1, 2, 4, 8}) {
    const auto p = bk::gain_preset(level).params();
    bk::Rng rng(static_cast<std::uint64_t>(level));
    const auto noisy = bk::add_noise(burst, p, rng);
    double sum = 0.0, var = 0.0, n = 0.0;
    for (int t = 0; t < 16; ++t)
      for (std::size_t i = 0; i < clean.size(); ++i) {
        sum += noisy.frame(t).values()[i] - clean.values()[i];
        var += p.variance(clean.values()[i]);
        n += 1;
      }
    ASSERT_GE(n, 1e6);
    const double stderr_mean = std::sqrt(var) / n;
    EXPECT_LE(std::abs(sum / n), 3.0 * stderr_mean) << level;
  }
}

TEST(Property, CompressionErrorNonIncreasingInB) {
  TestRng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto field = bk::testing::random_field(6, 6, {3, 2, 1}, rng, trial % 2 == 0);
    double prev = INFINITY;
    for (int b : {1, 2, 4, 8, 16}) {
      const auto c = bk::compress_kernel_field(field, b);
      const double e = relative_error(field, bk::reconstruct_kernels(c.basis, c.coefficients));
      ASSERT_LE(e, prev + 1e-12);
      prev = e;
    }
  }
}

TEST(Property, RankInvariantUnderPermutationAndScaling) {
  TestRng rng(6);
  const bk::KernelShape shape{3, 2, 1};
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int b = 2 + trial % 8;
    auto basis = bk::testing::random_basis(b, shape, rng, false);
    if (trial % 3 == 0) basis.set_element(1, basis.element(0));
    const int rank = bk::basis_rank(basis);
    std::vector<int> perm(static_cast<std::size_t>(b));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    bk::KernelBasisD moved(b, shape);
    for (int i = 0; i < b; ++i) {
      auto e = basis.element(perm[static_cast<std::size_t>(i)]);
      const double s = scale(rng) * (i % 2 == 0 ? 1.0 : -1.0);
      for (auto& v : e) v *= s;
      moved.set_element(i, e);
    }
    ASSERT_EQ(bk::basis_rank(moved), rank);
  }
}

TEST(Property, OverlapIsSymmetric) {
  TestRng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const bk::KernelShape shape{3, 1 + trial % 2, 1};
    const auto a = bk::testing::random_basis(1 + trial % 9, shape, rng, false);
    auto b = bk::testing::random_basis(1 + (trial * 7) % 9, shape, rng, false);
    if (trial % 4 == 0) b.set_element(0, a.element(0));
    ASSERT_EQ(bk::overlap_ratio(a, b), bk::overlap_ratio(b, a));
  }
}

TEST(Property, FilteringIsLinearInTheBurst) {
  TestRng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int c = trial % 2 == 0 ? 1 : 3;
    const bk::KernelShape shape{3 + 2 * (trial % 2), 2, 1};
    const auto i1 = bk::testing::random_burst(9, 11, c, 2, rng);
    const auto i2 = bk::testing::random_burst(9, 11, c, 2, rng);
    const double alpha = 0.7, beta = -1.3;
    std::vector<bk::ImageD> mix;
    for (int t = 0; t < 2; ++t) {
      bk::ImageD f(9, 11, c);
      for (std::size_t i = 0; i < f.size(); ++i)
        f.values()[i] = alpha * i1.frame(t).values()[i] + beta * i2.frame(t).values()[i];
      mix.push_back(std::move(f));
    }
    const bk::BurstD combined(std::move(mix));
    const auto basis = bk::testing::random_basis(3, shape, rng);
    const auto coeffs = bk::testing::random_coefficients(9, 11, 3, rng);
    const auto field = bk::reconstruct_kernels(basis, coeffs);
    auto check = [&](auto&& filter) {
      const auto a = filter(i1);
      const auto b = filter(i2);
      const auto m = filter(combined);
      double worst = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i)
        worst = std::max(worst, std::abs(m.values()[i] - (alpha * a.values()[i] + beta * b.values()[i])));
      return worst;
    };
    EXPECT_LE(check([&](const bk::BurstD& x) { return bk::filter_direct(x, field); }), 1e-6);
    EXPECT_LE(check([&](const bk::BurstD& x) { return bk::filter_factored(x, basis, coeffs); }), 1e-6);
    EXPECT_LE(check([&](const bk::BurstD& x) { return bk::filter_fourier(x, basis, coeffs); }), 1e-6);
  }
}

TEST(Property, NormalizedKernelsPreserveConstantsInInterior) {
  TestRng rng(9);
  for (int k : {3, 5, 7}) {
    const bk::ImageD flat(15, 13, 3, 0.37);
    const bk::BurstD burst(std::vector<bk::ImageD>(3, flat));
    const auto field = bk::testing::random_field(15, 13, {k, 3, 1}, rng);
    const auto basis = bk::testing::random_basis(4, {k, 3, 1}, rng);
    const auto coeffs = bk::testing::random_coefficients(15, 13, 4, rng);
    const auto d = bk::filter_direct(burst, field);
    const auto f = bk::filter_fourier(burst, basis, coeffs);
    const int r = (k - 1) / 2;
    for (int y = r; y < 15 - r; ++y)
      for (int x = r; x < 13 - r; ++x)
        for (int c = 0; c < 3; ++c) {
          ASSERT_NEAR(d(y, x, c), 0.37, 1e-12);
          ASSERT_NEAR(f(y, x, c), 0.37, 1e-12);
        }
  }
}

TEST(Property, FourierColdAndWarmBitEqual) {
  TestRng rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    const bk::KernelShape shape{5, 2, trial % 2 == 0 ? 1 : 3};
    const auto burst = bk::testing::random_burst(13 + trial, 9 + trial, 3, 2, rng);
    const auto basis = bk::testing::random_basis(3, shape, rng);
    const auto coeffs = bk::testing::random_coefficients(13 + trial, 9 + trial, 3, rng);
    bk::FftPlanCache cache;
    const auto cold = bk::filter_fourier(burst, basis, coeffs, {}, &cache);
    const auto warm = bk::filter_fourier(burst, basis, coeffs, {}, &cache);
    ASSERT_EQ(cold, warm);
  }
}

TEST(Property, FlopTotalsMonotoneInEverySize) {
  const int base[6] = {40, 48, 7, 4, 10, 1};
  for (auto backend : {bk::Backend::kDirect, bk::Backend::kFactored, bk::Backend::kFourier}) {
    for (int tile : {0, 16}) {
      for (int dim = 0; dim < 6; ++dim) {
        double prev = 0.0;
        for (int step = 0; step < 25; ++step) {
          int v[6];
          std::copy(base, base + 6, v);
          v[dim] = dim == 2 ? 1 + 2 * step : 1 + step * (dim == 5 ? 1 : 3);
          const auto r = bk::flop_report(v[0], v[1], v[2], v[3], v[4], v[5], backend, tile);
          ASSERT_GE(r.total_flops, prev) << bk::to_string(backend) << " dim " << dim;
          prev = r.total_flops;
        }
      }
    }
  }
}

TEST(Property, BasisPredictsFewerValuesBelowThreshold) {
  for (int hw : {16, 64, 128})
    for (int k : {3, 7, 15})
      for (int t : {1, 4, 8})
        for (int b = 1; b <= 400; b += 13) {
          const double wh = static_cast<double>(hw) * hw;
          const double k2t = static_cast<double>(k) * k * t;
          if (b < k2t * wh / (wh + k2t)) {
            ASSERT_LT(bk::prediction_count(hw, hw, k, t, b, bk::PredictionMode::kBasis),
                      bk::prediction_count(hw, hw, k, t, b, bk::PredictionMode::kKpn));
          }
        }
}

TEST(Property, PsnrFallsAsNoiseGrows) {
  bk::ImageD clean(128, 128);
  TestRng trng(11);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (auto& v : clean.values()) v = u(trng);
  const bk::BurstD burst({clean});
  double prev = INFINITY;
  for (int i = 1; i <= 20; ++i) {
    bk::Rng rng(100 + static_cast<std::uint64_t>(i));
    const double sigma = 0.005 * std::pow(1.25, i);
    const auto noisy = bk::add_noise(burst, {sigma, 0.0}, rng);
    const double p = bk::psnr(noisy.reference(), clean);
    ASSERT_LT(p, prev) << i;
    prev = p;
  }
}
