#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"

namespace ratekit {

/// Windowed-sinc interpolation kernel evaluated at the integer sample offsets
/// around a target site. `phase` is the fractional position of the site in
/// source units; taps cover every integer offset k with |k - phase| < a and
/// are normalized to unit sum.
struct LanczosKernel {
  int a = 3;
  double phase = 0.0;
  int first = 0;              // source offset of taps[0] relative to the base sample
  std::vector<double> taps;   // normalized weights
};

inline double lanczos_window(double x, int a) {
  if (x == 0.0) return 1.0;
  if (x <= -a || x >= a) return 0.0;
  const double px = std::numbers::pi * x;
  return a * std::sin(px) * std::sin(px / a) / (px * px);
}

/// Builds the tap set for one phase. Phase 0 yields 2a-1 taps, any other
/// phase in (0,1) yields 2a.
inline LanczosKernel make_lanczos_kernel(int a, double phase) {
  if (a < 1) throw ConfigError("lanczos lobe count must be >= 1");
  if (phase < 0.0 || phase >= 1.0) throw ConfigError("lanczos phase must lie in [0,1)");
  LanczosKernel k;
  k.a = a;
  k.phase = phase;
  k.first = -(a - 1);
  const int last = phase == 0.0 ? a - 1 : a;
  double sum = 0.0;
  for (int off = k.first; off <= last; ++off) {
    const double w = lanczos_window(double(off) - phase, a);
    k.taps.push_back(w);
    sum += w;
  }
  for (double& t : k.taps) t /= sum;
  return k;
}

namespace detail {

inline std::uint16_t round_clip(double v, int bit_depth) {
  long r = std::lround(v);  // halfway cases away from zero
  const long maxv = (1L << bit_depth) - 1;
  if (r < 0) r = 0;
  if (r > maxv) r = maxv;
  return std::uint16_t(r);
}

// One separable pass. For output index j the site lies at
// src = factor*j + site_offset; the kernel phase is the fractional part.
// Results are rounded and clipped per pass so both passes stay integer-exact
// and reproducible. Edges replicate.
inline Plane resample_axis(const Plane& p, bool horizontal, int out_len, double factor,
                           double site_offset, int lobes) {
  const int cross_len = horizontal ? p.height : p.width;
  Plane out = make_plane(horizontal ? out_len : cross_len, horizontal ? cross_len : out_len,
                         p.bit_depth);

  // Tap sets depend only on the fractional site position; precompute per output index.
  std::vector<LanczosKernel> kernels(out_len);
  std::vector<int> bases(out_len);
  for (int j = 0; j < out_len; ++j) {
    const double site = factor * j + site_offset;
    const double base = std::floor(site);
    bases[j] = int(base);
    kernels[j] = make_lanczos_kernel(lobes, site - base);
  }

  for (int c = 0; c < cross_len; ++c) {
    for (int j = 0; j < out_len; ++j) {
      const LanczosKernel& k = kernels[j];
      double acc = 0.0;
      for (std::size_t t = 0; t < k.taps.size(); ++t) {
        const int src = bases[j] + k.first + int(t);
        const std::uint16_t s =
            horizontal ? p.at_clamped(src, c) : p.at_clamped(c, src);
        acc += k.taps[t] * s;
      }
      if (horizontal)
        out.at(j, c) = round_clip(acc, p.bit_depth);
      else
        out.at(c, j) = round_clip(acc, p.bit_depth);
    }
  }
  return out;
}

}  // namespace detail

/// Halves both dimensions. Horizontal pass is co-sited (output j reads source
/// 2j, phase 0); vertical pass is interstitial (output i reads source 2i+0.5,
/// phase 0.5). Chroma sample location type 0 for 4:2:0 video.
inline Plane lanczos_downsample_2x(const Plane& p, int lobes = 3) {
  if (p.width % 2 != 0 || p.height % 2 != 0)
    throw FormatError("lanczos_downsample_2x requires even input dimensions, got " +
                      std::to_string(p.width) + "x" + std::to_string(p.height));
  Plane h = detail::resample_axis(p, true, p.width / 2, 2.0, 0.0, lobes);
  return detail::resample_axis(h, false, p.height / 2, 2.0, 0.5, lobes);
}

/// Doubles both dimensions, with phases inverse to the downsampler siting:
/// even output columns are copies (phase 0), odd columns interpolate at 0.5;
/// output rows interpolate at (y-0.5)/2, i.e. quarter phases 0.75/0.25.
inline Plane lanczos_upsample_2x(const Plane& p, int lobes = 3) {
  if (p.width <= 0 || p.height <= 0) throw FormatError("lanczos_upsample_2x: empty plane");
  Plane h = detail::resample_axis(p, true, p.width * 2, 0.5, 0.0, lobes);
  return detail::resample_axis(h, false, p.height * 2, 0.5, -0.25, lobes);
}

}  // namespace ratekit
