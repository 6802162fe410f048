#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"

namespace ratekit {

namespace detail {

inline void check_same_geometry(const Plane& a, const Plane& b, const char* what) {
  if (!a.same_size(b))
    throw FormatError(std::string(what) + ": plane dimensions differ (" +
                      std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                      std::to_string(b.width) + "x" + std::to_string(b.height) + ")");
  if (a.bit_depth != b.bit_depth)
    throw FormatError(std::string(what) + ": bit depths differ");
}

inline double plane_sse(const Plane& a, const Plane& b) {
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    sse += d * d;
  }
  return sse;
}

}  // namespace detail

enum class MetricKind { psnr, xpsnr, msssim, vmaf };

inline const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::psnr: return "psnr";
    case MetricKind::xpsnr: return "xpsnr";
    case MetricKind::msssim: return "msssim";
    case MetricKind::vmaf: return "vmaf";
  }
  throw ConfigError("unknown metric kind");
}

inline MetricKind parse_metric_kind(const std::string& name) {
  if (name == "psnr") return MetricKind::psnr;
  if (name == "xpsnr") return MetricKind::xpsnr;
  if (name == "msssim") return MetricKind::msssim;
  if (name == "vmaf") return MetricKind::vmaf;
  throw ConfigError("unknown metric '" + name + "' (expected psnr, xpsnr, msssim, or vmaf)");
}

/// A metric result. `infinite` marks identical-input dB metrics; `value`
/// holds +infinity in that case so comparisons still order correctly.
struct MetricScore {
  MetricKind kind = MetricKind::psnr;
  double value = 0.0;
  bool infinite = false;

  static MetricScore of(MetricKind kind, double value) {
    return MetricScore{kind, value, std::isinf(value)};
  }
};

/// PSNR in dB over one plane. Identical planes yield +infinity.
inline double psnr(const Plane& ref, const Plane& deg) {
  detail::check_same_geometry(ref, deg, "psnr");
  const double sse = detail::plane_sse(ref, deg);
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / double(ref.sample_count());
  const double peak = double(ref.max_value());
  return 10.0 * std::log10(peak * peak / mse);
}

/// Combined PSNR across Y, Cb, Cr with 6:1:1 weighting applied to the MSEs.
/// Weighting in the MSE domain keeps the result finite when only some planes
/// reconstruct exactly.
inline double psnr_yuv(const Yuv420Picture& ref, const Yuv420Picture& deg) {
  detail::check_same_geometry(ref.y, deg.y, "psnr_yuv");
  detail::check_same_geometry(ref.cb, deg.cb, "psnr_yuv");
  detail::check_same_geometry(ref.cr, deg.cr, "psnr_yuv");
  const double mse_y = detail::plane_sse(ref.y, deg.y) / double(ref.y.sample_count());
  const double mse_cb = detail::plane_sse(ref.cb, deg.cb) / double(ref.cb.sample_count());
  const double mse_cr = detail::plane_sse(ref.cr, deg.cr) / double(ref.cr.sample_count());
  const double mse = (6.0 * mse_y + mse_cb + mse_cr) / 8.0;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = double(ref.y.max_value());
  return 10.0 * std::log10(peak * peak / mse);
}

/// Parameters of the activity-weighted PSNR variant. `activity_floor`
/// defaults to 2^(bit_depth-6); passing a non-positive value selects that
/// default at call time.
struct XpsnrParams {
  int block_size = 32;
  double beta = 0.5;
  double activity_floor = -1.0;
  int bit_depth = 10;

  double effective_floor() const {
    return activity_floor > 0.0 ? activity_floor : double(1 << (bit_depth - 6));
  }
};

/// Per-block visual activity of one plane: mean absolute response of the
/// 3x3 high-pass
///   -1 -2 -1
///   -2 12 -2
///   -1 -2 -1
/// with replicated borders, floored at `a_min`. Blocks tile from the top-left;
/// trailing blocks may be smaller.
struct BlockActivityMap {
  int blocks_x = 0;
  int blocks_y = 0;
  std::vector<double> activity;

  double at(int bx, int by) const { return activity[std::size_t(by) * blocks_x + bx]; }
};

inline double highpass_response(const Plane& p, int x, int y) {
  const double c = double(p.at_clamped(x, y));
  const double n = double(p.at_clamped(x, y - 1));
  const double s = double(p.at_clamped(x, y + 1));
  const double w = double(p.at_clamped(x - 1, y));
  const double e = double(p.at_clamped(x + 1, y));
  const double nw = double(p.at_clamped(x - 1, y - 1));
  const double ne = double(p.at_clamped(x + 1, y - 1));
  const double sw = double(p.at_clamped(x - 1, y + 1));
  const double se = double(p.at_clamped(x + 1, y + 1));
  return 12.0 * c - 2.0 * (n + s + w + e) - (nw + ne + sw + se);
}

inline BlockActivityMap block_activity(const Plane& p, const XpsnrParams& params = {}) {
  if (params.block_size < 1) throw ConfigError("block size must be positive");
  const int bs = params.block_size;
  const double a_min = params.effective_floor();

  BlockActivityMap map;
  map.blocks_x = (p.width + bs - 1) / bs;
  map.blocks_y = (p.height + bs - 1) / bs;
  map.activity.resize(std::size_t(map.blocks_x) * map.blocks_y);

  for (int by = 0; by < map.blocks_y; ++by) {
    for (int bx = 0; bx < map.blocks_x; ++bx) {
      const int x0 = bx * bs, y0 = by * bs;
      const int x1 = std::min(x0 + bs, p.width), y1 = std::min(y0 + bs, p.height);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += std::abs(highpass_response(p, x, y));
      const double mean = sum / (double(x1 - x0) * double(y1 - y0));
      map.activity[std::size_t(by) * map.blocks_x + bx] = std::max(a_min, mean);
    }
  }
  return map;
}

/// Activity-weighted PSNR over one plane. Block weights derive from the
/// reference only: w_k = (a_pic / a_k)^beta, where a_pic is the mean block
/// activity. The weighted MSE sums w_k * SSE_k over blocks, divided by the
/// total sample count. Uniform activity reduces every weight to 1 and the
/// result to plain PSNR.
inline double xpsnr(const Plane& ref, const Plane& deg, const XpsnrParams& params = {}) {
  detail::check_same_geometry(ref, deg, "xpsnr");
  if (ref.bit_depth != params.bit_depth)
    throw ConfigError("xpsnr: plane bit depth does not match parameters");

  const BlockActivityMap map = block_activity(ref, params);
  double a_pic = 0.0;
  for (double a : map.activity) a_pic += a;
  a_pic /= double(map.activity.size());

  const int bs = params.block_size;
  double wsse = 0.0;
  for (int by = 0; by < map.blocks_y; ++by) {
    for (int bx = 0; bx < map.blocks_x; ++bx) {
      const int x0 = bx * bs, y0 = by * bs;
      const int x1 = std::min(x0 + bs, ref.width), y1 = std::min(y0 + bs, ref.height);
      double sse = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const double d = double(ref.at(x, y)) - double(deg.at(x, y));
          sse += d * d;
        }
      }
      wsse += std::pow(a_pic / map.at(bx, by), params.beta) * sse;
    }
  }

  if (wsse == 0.0) return std::numeric_limits<double>::infinity();
  const double wmse = wsse / double(ref.sample_count());
  const double peak = double(ref.max_value());
  return 10.0 * std::log10(peak * peak / wmse);
}

}  // namespace ratekit
