#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"
#include "ratekit/metrics.hpp"

namespace ratekit {

/// Five-scale structural similarity with the standard per-scale exponents.
/// `k1`/`k2` feed the stabilizing constants C1=(k1 L)^2, C2=(k2 L)^2 where L
/// is the code-value peak.
struct MsSsimParams {
  int scales = 5;
  std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

namespace detail {

struct Mat {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int w, int h) : width(w), height(h), v(std::size_t(w) * h, 0.0) {}
  double& at(int x, int y) { return v[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return v[std::size_t(y) * width + x]; }
};

inline Mat to_mat(const Plane& p) {
  Mat m(p.width, p.height);
  for (std::size_t i = 0; i < p.data.size(); ++i) m.v[i] = double(p.data[i]);
  return m;
}

inline std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> g(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = double(i) - double(size - 1) / 2.0;
    g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (double& x : g) x /= sum;
  return g;
}

/// Separable convolution keeping only fully covered positions, so the output
/// shrinks by (taps-1) per axis.
inline Mat valid_sep_conv(const Mat& in, const std::vector<double>& k) {
  const int n = int(k.size());
  Mat tmp(in.width - n + 1, in.height);
  for (int y = 0; y < tmp.height; ++y) {
    for (int x = 0; x < tmp.width; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * in.at(x + i, y);
      tmp.at(x, y) = acc;
    }
  }
  Mat out(tmp.width, in.height - n + 1);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * tmp.at(x, y + i);
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out(a.width, a.height);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

inline double mat_mean(const Mat& m) {
  double sum = 0.0;
  for (double x : m.v) sum += x;
  return sum / double(m.v.size());
}

/// Average 2x2 blocks, dropping a trailing odd row/column first.
inline Mat mean_pool_2x2(const Mat& in) {
  Mat out(in.width / 2, in.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                      in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1)) *
                     0.25;
    }
  }
  return out;
}

struct SsimCs {
  double ssim;  // mean of luminance * contrast-structure
  double cs;    // mean of contrast-structure alone
};

/// Single-scale pass. Variances come from the uncentered form
/// conv(x*x) - mu^2, matching the windowed-moment formulation. For identical
/// inputs every map entry is exactly 1 because 2ab and a^2+b^2 evaluate to the
/// same floating-point value when a == b.
inline SsimCs ssim_pass(const Mat& x, const Mat& y, double max_val, const MsSsimParams& p) {
  const double c1 = (p.k1 * max_val) * (p.k1 * max_val);
  const double c2 = (p.k2 * max_val) * (p.k2 * max_val);
  const std::vector<double> k = gaussian_taps(p.window, p.sigma);

  const Mat mx = valid_sep_conv(x, k);
  const Mat my = valid_sep_conv(y, k);
  Mat sxx = valid_sep_conv(mat_mul(x, x), k);
  Mat syy = valid_sep_conv(mat_mul(y, y), k);
  Mat sxy = valid_sep_conv(mat_mul(x, y), k);
  for (std::size_t i = 0; i < sxx.v.size(); ++i) {
    sxx.v[i] -= mx.v[i] * mx.v[i];
    syy.v[i] -= my.v[i] * my.v[i];
    sxy.v[i] -= mx.v[i] * my.v[i];
  }

  Mat lum_cs(mx.width, mx.height);
  Mat cs(mx.width, mx.height);
  for (std::size_t i = 0; i < cs.v.size(); ++i) {
    const double lum =
        (2.0 * mx.v[i] * my.v[i] + c1) / (mx.v[i] * mx.v[i] + my.v[i] * my.v[i] + c1);
    cs.v[i] = (2.0 * sxy.v[i] + c2) / (sxx.v[i] + syy.v[i] + c2);
    lum_cs.v[i] = lum * cs.v[i];
  }
  return {mat_mean(lum_cs), mat_mean(cs)};
}

}  // namespace detail

/// Multi-scale similarity of two planes in [0, 1]. The contrast-structure
/// term is taken at every scale, the luminance term only at the coarsest; each
/// scale's mean is clamped at zero before exponentiation. The input must stay
/// at least `window` pixels per axis after all poolings (176 at defaults).
inline double ms_ssim(const Plane& ref, const Plane& deg, const MsSsimParams& params = {}) {
  detail::check_same_geometry(ref, deg, "ms_ssim");
  if (params.scales < 1 || params.scales > 5) throw ConfigError("ms_ssim: scales must be 1..5");

  int w = ref.width, h = ref.height;
  for (int level = 0; level < params.scales; ++level) {
    if (w < params.window || h < params.window)
      throw FormatError("ms_ssim: input " + std::to_string(ref.width) + "x" +
                        std::to_string(ref.height) + " is too small for " +
                        std::to_string(params.scales) + " scales");
    w /= 2;
    h /= 2;
  }

  const double max_val = double(ref.max_value());
  detail::Mat x = detail::to_mat(ref);
  detail::Mat y = detail::to_mat(deg);

  std::vector<double> vals;
  for (int level = 0; level < params.scales; ++level) {
    const detail::SsimCs s = detail::ssim_pass(x, y, max_val, params);
    vals.push_back(level == params.scales - 1 ? s.ssim : s.cs);
    if (level < params.scales - 1) {
      x = detail::mean_pool_2x2(x);
      y = detail::mean_pool_2x2(y);
    }
  }

  double result = 1.0;
  for (int level = 0; level < params.scales; ++level)
    result *= std::pow(std::max(vals[level], 0.0), params.weights[level]);
  return result;
}

}  // namespace ratekit
