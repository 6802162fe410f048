#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ratekit/errors.hpp"

namespace ratekit {

/// Non-negative exact rational. Keeps budget arithmetic free of binary
/// floating-point rounding.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  void reduce() {
    const std::uint64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
};

/// Parses a non-negative decimal literal ("8", "0.075", "12.5") into an exact
/// fraction.
inline Rational parse_decimal(const std::string& text) {
  if (text.empty()) throw ConfigError("empty decimal literal");
  std::string digits;
  std::size_t frac_len = 0;
  bool seen_dot = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw ConfigError("invalid decimal literal '" + text + "'");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_len;
    } else {
      throw ConfigError("invalid decimal literal '" + text + "'");
    }
  }
  if (digits.empty()) throw ConfigError("invalid decimal literal '" + text + "'");
  if (digits.size() > 18) throw ConfigError("decimal literal '" + text + "' has too many digits");

  Rational r;
  r.num = std::stoull(digits);
  r.den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) r.den *= 10;
  r.reduce();
  return r;
}

/// A per-set byte budget derived from a bits-per-pixel target.
struct BudgetSpec {
  Rational bpp;
  std::uint64_t total_pixels = 0;
  std::uint64_t budget_bytes = 0;
};

/// budget_bytes = floor(total_pixels * bpp / 8), computed exactly.
inline BudgetSpec compute_budget(const Rational& bpp, std::uint64_t total_pixels) {
  if (bpp.num == 0) throw ConfigError("bits-per-pixel target must be positive");
  if (total_pixels == 0) throw ConfigError("total pixel count must be positive");
  BudgetSpec spec;
  spec.bpp = bpp;
  spec.total_pixels = total_pixels;
  const unsigned __int128 bits_num = (unsigned __int128)total_pixels * bpp.num;
  const unsigned __int128 denom = (unsigned __int128)bpp.den * 8;
  spec.budget_bytes = std::uint64_t(bits_num / denom);
  return spec;
}

inline BudgetSpec compute_budget(const std::string& bpp_decimal, std::uint64_t total_pixels) {
  return compute_budget(parse_decimal(bpp_decimal), total_pixels);
}

/// One operating point of one image: the encode at a given qp and the quality
/// score used for allocation, plus any extra metrics recorded alongside.
struct RateQualityPoint {
  int qp = 0;
  std::uint64_t bytes = 0;
  double quality = 0.0;
  std::map<std::string, double> aux;

  friend bool operator==(const RateQualityPoint& a, const RateQualityPoint& b) {
    return a.qp == b.qp && a.bytes == b.bytes && a.quality == b.quality && a.aux == b.aux;
  }
};

/// Pareto frontier of one image's sweep: bytes and quality both strictly
/// increase along `points`.
struct RateQualityCurve {
  std::string image_id;
  std::uint64_t pixels = 0;
  std::vector<RateQualityPoint> points;
};

/// Sorts by bytes and drops every point that a cheaper-or-equal point matches
/// or beats on quality.
inline RateQualityCurve build_curve(std::string image_id, std::uint64_t pixels,
                                    std::vector<RateQualityPoint> raw_points) {
  if (raw_points.empty())
    throw ConfigError("curve for '" + image_id + "' needs at least one point");
  for (const RateQualityPoint& p : raw_points) {
    if (p.bytes == 0)
      throw FormatError("curve for '" + image_id + "': point at qp " + std::to_string(p.qp) +
                        " has zero bytes");
    if (!std::isfinite(p.quality))
      throw FormatError("curve for '" + image_id + "': point at qp " + std::to_string(p.qp) +
                        " has non-finite quality");
  }

  std::stable_sort(raw_points.begin(), raw_points.end(),
                   [](const RateQualityPoint& a, const RateQualityPoint& b) {
                     if (a.bytes != b.bytes) return a.bytes < b.bytes;
                     return a.quality > b.quality;
                   });

  RateQualityCurve curve;
  curve.image_id = std::move(image_id);
  curve.pixels = pixels;
  for (RateQualityPoint& p : raw_points) {
    if (!curve.points.empty()) {
      if (p.bytes == curve.points.back().bytes) continue;      // costlier duplicate size
      if (p.quality <= curve.points.back().quality) continue;  // dominated
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

/// Curves handed to the allocator must already be Pareto frontiers.
inline void validate_curve(const RateQualityCurve& curve) {
  if (curve.points.empty())
    throw ConfigError("curve for '" + curve.image_id + "' is empty");
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RateQualityPoint& p = curve.points[i];
    if (p.bytes == 0 || !std::isfinite(p.quality))
      throw FormatError("curve for '" + curve.image_id + "' has an invalid point");
    if (i > 0 && (p.bytes <= curve.points[i - 1].bytes ||
                  p.quality <= curve.points[i - 1].quality))
      throw FormatError("curve for '" + curve.image_id +
                        "' is not strictly increasing in bytes and quality; prune it first");
  }
}

}  // namespace ratekit
