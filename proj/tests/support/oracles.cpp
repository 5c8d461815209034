// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace burstkernel::testing {
namespace {

double at_or_zero(const ImageD& img, int y, int x, int c) {
  if (y < 0 || x < 0 || y >= img.height() || x >= img.width()) return 0.0;
  return img(y, x, c);
}

std::vector<double> softmax(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += out[i] = std::exp(v[i] - m);
  for (auto& o : out) o /= s;
  return out;
}

int smooth_at_least(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace

ImageD random_image(int h, int w, int c, TestRng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageD img(h, w, c);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

BurstD random_burst(int h, int w, int c, int frames, TestRng& rng) {
  std::vector<ImageD> f;
  for (int t = 0; t < frames; ++t) f.push_back(random_image(h, w, c, rng));
  return BurstD(std::move(f));
}

KernelFieldD random_field(int h, int w, KernelShape shape, TestRng& rng, bool normalized) {
  std::normal_distribution<double> n(0.0, 1.0);
  KernelFieldD field(h, w, shape, normalized);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int g = 0; g < shape.groups; ++g) {
        std::vector<double> logits;
        for (int iy = 0; iy < shape.size; ++iy)
          for (int ix = 0; ix < shape.size; ++ix)
            for (int t = 0; t < shape.frames; ++t) logits.push_back(n(rng));
        const auto w8 = normalized ? softmax(logits) : logits;
        std::size_t i = 0;
        for (int iy = 0; iy < shape.size; ++iy)
          for (int ix = 0; ix < shape.size; ++ix)
            for (int t = 0; t < shape.frames; ++t) field.at(y, x, iy, ix, t, g) = w8[i++];
      }
    }
  }
  return field;
}

KernelBasisD random_basis(int elements, KernelShape shape, TestRng& rng, bool normalized) {
  std::normal_distribution<double> n(0.0, 1.0);
  KernelBasisD basis(elements, shape, normalized);
  for (int b = 0; b < elements; ++b) {
    for (int g = 0; g < shape.groups; ++g) {
      std::vector<double> logits;
      for (int iy = 0; iy < shape.size; ++iy)
        for (int ix = 0; ix < shape.size; ++ix)
          for (int t = 0; t < shape.frames; ++t) logits.push_back(n(rng));
      const auto v = normalized ? softmax(logits) : logits;
      std::size_t i = 0;
      for (int iy = 0; iy < shape.size; ++iy)
        for (int ix = 0; ix < shape.size; ++ix)
          for (int t = 0; t < shape.frames; ++t) basis.at(iy, ix, t, g, b) = v[i++];
    }
  }
  return basis;
}

CoefficientFieldD random_coefficients(int h, int w, int elements, TestRng& rng, bool normalized) {
  std::normal_distribution<double> n(0.0, 1.0);
  CoefficientFieldD coeffs(h, w, elements, normalized);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::vector<double> logits(static_cast<std::size_t>(elements));
      for (auto& l : logits) l = n(rng);
      const auto v = normalized ? softmax(logits) : logits;
      std::copy(v.begin(), v.end(), coeffs.at(y, x).begin());
    }
  }
  return coeffs;
}

template <Real T>
double max_abs_diff(const Image<T>& a, const Image<T>& b) {
  double m = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < a.channels(); ++c)
        m = std::max(m, std::abs(static_cast<double>(a(y, x, c)) - static_cast<double>(b(y, x, c))));
  return m;
}
template double max_abs_diff(const Image<float>&, const Image<float>&);
template double max_abs_diff(const Image<double>&, const Image<double>&);

ImageD naive_filter(const BurstD& burst, const KernelFieldD& field) {
  const auto& s = field.shape();
  const int r = (s.size - 1) / 2;
  ImageD out(burst.height(), burst.width(), burst.channels());
  for (int y = 0; y < burst.height(); ++y) {
    for (int x = 0; x < burst.width(); ++x) {
      for (int c = 0; c < burst.channels(); ++c) {
        const int g = s.groups == 1 ? 0 : c;
        double acc = 0.0;
        for (int t = 0; t < s.frames; ++t)
          for (int iy = 0; iy < s.size; ++iy)
            for (int ix = 0; ix < s.size; ++ix)
              acc += field.at(y, x, iy, ix, t, g) *
                     at_or_zero(burst.frame(t), y - (iy - r), x - (ix - r), c);
        out(y, x, c) = acc;
      }
    }
  }
  return out;
}

ImageD naive_frame_estimate(const BurstD& burst, const KernelFieldD& field, int t) {
  const auto& s = field.shape();
  const int r = (s.size - 1) / 2;
  ImageD out(burst.height(), burst.width(), burst.channels());
  for (int y = 0; y < burst.height(); ++y) {
    for (int x = 0; x < burst.width(); ++x) {
      for (int c = 0; c < burst.channels(); ++c) {
        const int g = s.groups == 1 ? 0 : c;
        double acc = 0.0;
        for (int iy = 0; iy < s.size; ++iy)
          for (int ix = 0; ix < s.size; ++ix)
            acc += field.at(y, x, iy, ix, t, g) *
                   at_or_zero(burst.frame(t), y - (iy - r), x - (ix - r), c);
        out(y, x, c) = s.frames * acc;
      }
    }
  }
  return out;
}

KernelFieldD naive_reconstruct(const KernelBasisD& basis, const CoefficientFieldD& coeffs) {
  const auto& s = basis.shape();
  KernelFieldD field(coeffs.height(), coeffs.width(), s);
  for (int y = 0; y < coeffs.height(); ++y)
    for (int x = 0; x < coeffs.width(); ++x)
      for (int iy = 0; iy < s.size; ++iy)
        for (int ix = 0; ix < s.size; ++ix)
          for (int t = 0; t < s.frames; ++t)
            for (int g = 0; g < s.groups; ++g) {
              double acc = 0.0;
              for (int b = 0; b < basis.elements(); ++b)
                acc += basis.at(iy, ix, t, g, b) * coeffs.at(y, x)[static_cast<std::size_t>(b)];
              field.at(y, x, iy, ix, t, g) = acc;
            }
  return field;
}

ImageD naive_conv2d(const ImageD& plane, const std::vector<double>& kernel, int size) {
  const int r = (size - 1) / 2;
  ImageD out(plane.height(), plane.width(), 1);
  for (int y = 0; y < plane.height(); ++y)
    for (int x = 0; x < plane.width(); ++x) {
      double acc = 0.0;
      for (int iy = 0; iy < size; ++iy)
        for (int ix = 0; ix < size; ++ix)
          acc += kernel[static_cast<std::size_t>(iy * size + ix)] *
                 at_or_zero(plane, y - (iy - r), x - (ix - r), 0);
      out(y, x) = acc;
    }
  return out;
}

std::vector<double> naive_nlm_kernel(const BurstD& burst, const NoiseParams& params, int y, int x,
                                     int kernel_size, int patch_radius, double bandwidth,
                                     int group) {
  const int r = (kernel_size - 1) / 2;
  const int pr = patch_radius;
  const ImageD& ref = burst.reference();
  std::vector<int> chans;
  if (group < 0) {
    for (int c = 0; c < burst.channels(); ++c) chans.push_back(c);
  } else {
    chans.push_back(group);
  }
  const double area = (2.0 * pr + 1) * (2.0 * pr + 1);
  double mean = 0.0;
  for (int py = -pr; py <= pr; ++py)
    for (int px = -pr; px <= pr; ++px)
      for (int c : chans) mean += at_or_zero(ref, y + py, x + px, c);
  mean /= area * static_cast<double>(chans.size());
  const double var = std::max(params.variance(mean), 1e-12);

  std::vector<double> logits;
  for (int iy = 0; iy < kernel_size; ++iy) {
    for (int ix = 0; ix < kernel_size; ++ix) {
      for (int t = 0; t < burst.num_frames(); ++t) {
        const int dy = iy - r;
        const int dx = ix - r;
        double d2 = 0.0;
        for (int py = -pr; py <= pr; ++py)
          for (int px = -pr; px <= pr; ++px)
            for (int c : chans) {
              const double e = at_or_zero(ref, y + py, x + px, c) -
                               at_or_zero(burst.frame(t), y + py - dy, x + px - dx, c);
              d2 += e * e;
            }
        d2 /= area * static_cast<double>(chans.size());
        logits.push_back(-d2 / (2.0 * bandwidth * bandwidth * var));
      }
    }
  }
  return softmax(logits);
}

double naive_mse(const ImageD& a, const ImageD& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

LossTerms naive_loss_terms(const ImageD& pred, const ImageD& truth) {
  LossTerms out;
  out.l2_intensity = naive_mse(pred, truth);
  const int h = pred.height();
  const int w = pred.width();
  double g = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < pred.channels(); ++c) {
        const double e = pred(y, x, c) - truth(y, x, c);
        if (x + 1 < w) g += std::abs((pred(y, x + 1, c) - truth(y, x + 1, c)) - e);
        if (y + 1 < h) g += std::abs((pred(y + 1, x, c) - truth(y + 1, x, c)) - e);
      }
  out.l1_gradient = g / static_cast<double>(pred.size());
  return out;
}

std::vector<double> jacobi_singular_values(const KernelFieldD& field) {
  const Eigen::Index rows = static_cast<Eigen::Index>(field.height()) * field.width();
  const Eigen::Index cols = static_cast<Eigen::Index>(field.shape().taps());
  Eigen::MatrixXd m(rows, cols);
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      const auto k = field.kernel(y, x);
      for (Eigen::Index j = 0; j < cols; ++j)
        m(static_cast<Eigen::Index>(y) * field.width() + x, j) = k[static_cast<std::size_t>(j)];
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

int jacobi_rank(const std::vector<std::vector<double>>& rows, double tol) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > tol * sv(0) ? 1 : 0;
  return rank;
}

double naive_wcss(const CoefficientFieldD& coeffs, const std::vector<int>& labels, int k) {
  const int e = coeffs.elements();
  std::vector<std::vector<double>> sum(static_cast<std::size_t>(k),
                                       std::vector<double>(static_cast<std::size_t>(e), 0.0));
  std::vector<int> count(static_cast<std::size_t>(k), 0);
  for (int y = 0; y < coeffs.height(); ++y)
    for (int x = 0; x < coeffs.width(); ++x) {
      const int l = labels[static_cast<std::size_t>(y * coeffs.width() + x)];
      ++count[static_cast<std::size_t>(l)];
      for (int b = 0; b < e; ++b)
        sum[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)] +=
            coeffs.at(y, x)[static_cast<std::size_t>(b)];
    }
  double total = 0.0;
  for (int y = 0; y < coeffs.height(); ++y)
    for (int x = 0; x < coeffs.width(); ++x) {
      const auto l = static_cast<std::size_t>(labels[static_cast<std::size_t>(y * coeffs.width() + x)]);
      for (int b = 0; b < e; ++b) {
        const double d = coeffs.at(y, x)[static_cast<std::size_t>(b)] -
                         sum[l][static_cast<std::size_t>(b)] / count[l];
        total += d * d;
      }
    }
  return total;
}

FlopOracle flop_oracle(int h, int w, int k, int t, int b, int c, Backend backend, int tile) {
  using U = std::uint64_t;
  FlopOracle o;
  const U H = static_cast<U>(h), W = static_cast<U>(w), K = static_cast<U>(k),
          Tn = static_cast<U>(t), Bn = static_cast<U>(b), C = static_cast<U>(c);
  if (backend == Backend::kDirect) o.filter_macs = H * W * K * K * Tn * C;
  if (backend == Backend::kFactored) o.filter_macs = H * W * K * K * Tn * Bn * C;
  if (backend != Backend::kDirect) o.mixing_macs = H * W * Bn * C;
  if (backend == Backend::kFourier) {
    const int th = tile == 0 ? h : std::min(tile, h);
    const int tw = tile == 0 ? w : std::min(tile, w);
    const U tiles = static_cast<U>((h + th - 1) / th) * static_cast<U>((w + tw - 1) / tw);
    const U fh = static_cast<U>(smooth_at_least(th + k - 1));
    const U fw = static_cast<U>(smooth_at_least(tw + k - 1));
    o.transforms = tiles * (Tn * C + Bn * C) + Bn * Tn * C;
    const double n = static_cast<double>(fh * fw);
    const double bins = static_cast<double>(fh * (fw / 2 + 1));
    o.fft_flops = static_cast<double>(o.transforms) * (2.5 * n * std::log2(n)) +
                  6.0 * bins * static_cast<double>(tiles * Bn * Tn * C);
  }
  o.total_flops = 2.0 * (static_cast<double>(o.filter_macs) + static_cast<double>(o.mixing_macs)) +
                  o.fft_flops;
  return o;
}

}  // namespace burstkernel::testing
