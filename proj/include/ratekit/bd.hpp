#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ratekit/errors.hpp"
#include "ratekit/fileio.hpp"

#include "json.hpp"

namespace ratekit {

struct RdPoint {
  double rate = 0.0;     // bytes or bits-per-pixel; both curves must agree
  double quality = 0.0;  // any score; both curves must agree
};

/// A rate-distortion curve for delta computation: at least 4 points, rates
/// positive and strictly increasing.
struct RdCurve {
  std::string label;
  std::vector<RdPoint> points;
};

inline void validate_rd_curve(const RdCurve& curve) {
  if (curve.points.size() < 4)
    throw ConfigError("curve '" + curve.label + "' has " +
                      std::to_string(curve.points.size()) +
                      " points; cubic fitting needs at least 4");
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RdPoint& p = curve.points[i];
    if (!(p.rate > 0.0)) throw FormatError("curve '" + curve.label + "' has a non-positive rate");
    if (!std::isfinite(p.quality))
      throw FormatError("curve '" + curve.label + "' has a non-finite quality");
    if (i > 0 && !(p.rate > curve.points[i - 1].rate))
      throw FormatError("curve '" + curve.label + "' rates are not strictly increasing");
  }
}

enum class BdKind { rate, quality };

struct BdResult {
  BdKind kind = BdKind::rate;
  double value = 0.0;  // percent for rate, score delta for quality
  double overlap_lo = 0.0;
  double overlap_hi = 0.0;
};

namespace detail {

/// Least-squares cubic through (x, y) pairs, fitted in x - mean(x) for
/// conditioning. Coefficients c[0..3] multiply powers of the centered
/// variable; `center` records the shift.
struct CubicFit {
  std::array<double, 4> c{};
  double center = 0.0;

  double integral(double lo, double hi) const {
    const auto anti = [&](double x) {
      const double t = x - center;
      return t * (c[0] + t * (c[1] / 2 + t * (c[2] / 3 + t * c[3] / 4)));
    };
    return anti(hi) - anti(lo);
  }
};

inline CubicFit fit_cubic(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  long double mean = 0.0L;
  for (double x : xs) mean += x;
  mean /= (long double)(n);

  // Normal equations in the centered variable, solved by Gaussian
  // elimination with partial pivoting.
  long double a[4][5] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const long double t = (long double)(xs[i]) - mean;
    long double pw[7];
    pw[0] = 1.0L;
    for (int k = 1; k <= 6; ++k) pw[k] = pw[k - 1] * t;
    for (int r = 0; r < 4; ++r) {
      for (int col = 0; col < 4; ++col) a[r][col] += pw[r + col];
      a[r][4] += pw[r] * (long double)(ys[i]);
    }
  }
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs((double)a[r][col]) > std::fabs((double)a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0L)
      throw FormatError("curve fit is degenerate (repeated fitting coordinates?)");
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int k = col; k <= 4; ++k) a[r][k] -= f * a[col][k];
    }
  }

  CubicFit fit;
  fit.center = double(mean);
  for (int r = 0; r < 4; ++r) fit.c[r] = double(a[r][4] / a[r][r]);
  return fit;
}

struct Overlap {
  double lo;
  double hi;
};

inline Overlap overlap_interval(const std::vector<double>& a, const std::vector<double>& b,
                                const std::string& what, const std::string& label_a,
                                const std::string& label_b) {
  const auto range = [](const std::vector<double>& v) {
    return std::pair<double, double>(*std::min_element(v.begin(), v.end()),
                                     *std::max_element(v.begin(), v.end()));
  };
  const auto [alo, ahi] = range(a);
  const auto [blo, bhi] = range(b);
  const double lo = std::max(alo, blo);
  const double hi = std::min(ahi, bhi);
  if (!(lo < hi))
    throw FormatError("no " + what + " overlap between '" + label_a + "' [" +
                      std::to_string(alo) + ", " + std::to_string(ahi) + "] and '" + label_b +
                      "' [" + std::to_string(blo) + ", " + std::to_string(bhi) + "]");
  return {lo, hi};
}

}  // namespace detail

/// Average rate difference at equal quality: fit log10(rate) against quality
/// for each curve, integrate the difference over the shared quality interval,
/// convert the mean log offset back to percent. Negative means the tested
/// curve spends fewer bits.
inline BdResult bd_rate(const RdCurve& reference, const RdCurve& tested) {
  validate_rd_curve(reference);
  validate_rd_curve(tested);

  const auto extract = [](const RdCurve& c) {
    std::vector<double> q, lr;
    for (const RdPoint& p : c.points) {
      q.push_back(p.quality);
      lr.push_back(std::log10(p.rate));
    }
    return std::pair(q, lr);
  };
  const auto [ref_q, ref_lr] = extract(reference);
  const auto [tst_q, tst_lr] = extract(tested);

  const detail::Overlap ov =
      detail::overlap_interval(ref_q, tst_q, "quality", reference.label, tested.label);
  const detail::CubicFit ref_fit = detail::fit_cubic(ref_q, ref_lr);
  const detail::CubicFit tst_fit = detail::fit_cubic(tst_q, tst_lr);

  const double mean_diff =
      (tst_fit.integral(ov.lo, ov.hi) - ref_fit.integral(ov.lo, ov.hi)) / (ov.hi - ov.lo);
  return BdResult{BdKind::rate, (std::pow(10.0, mean_diff) - 1.0) * 100.0, ov.lo, ov.hi};
}

/// Average quality difference at equal rate: fit quality against log10(rate)
/// and take the mean vertical offset over the shared log-rate interval.
inline BdResult bd_quality(const RdCurve& reference, const RdCurve& tested) {
  validate_rd_curve(reference);
  validate_rd_curve(tested);

  const auto extract = [](const RdCurve& c) {
    std::vector<double> lr, q;
    for (const RdPoint& p : c.points) {
      lr.push_back(std::log10(p.rate));
      q.push_back(p.quality);
    }
    return std::pair(lr, q);
  };
  const auto [ref_lr, ref_q] = extract(reference);
  const auto [tst_lr, tst_q] = extract(tested);

  const detail::Overlap ov =
      detail::overlap_interval(ref_lr, tst_lr, "rate", reference.label, tested.label);
  const detail::CubicFit ref_fit = detail::fit_cubic(ref_lr, ref_q);
  const detail::CubicFit tst_fit = detail::fit_cubic(tst_lr, tst_q);

  const double mean_diff =
      (tst_fit.integral(ov.lo, ov.hi) - ref_fit.integral(ov.lo, ov.hi)) / (ov.hi - ov.lo);
  return BdResult{BdKind::quality, mean_diff, ov.lo, ov.hi};
}

/// RD curve files: JSON with a label and [rate, quality] pairs.
inline void save_rd_curve(const RdCurve& curve, const std::string& path) {
  nlohmann::json points = nlohmann::json::array();
  for (const RdPoint& p : curve.points) points.push_back({p.rate, p.quality});
  nlohmann::json j;
  j["label"] = curve.label;
  j["points"] = points;
  write_file_atomic(path, j.dump(2) + "\n");
}

inline RdCurve load_rd_curve(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("rd curve file " + path + " is not valid JSON: " + e.what());
  }
  try {
    RdCurve curve;
    curve.label = j.at("label").get<std::string>();
    for (const nlohmann::json& jp : j.at("points"))
      curve.points.push_back({jp.at(0).get<double>(), jp.at(1).get<double>()});
    return curve;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("rd curve file " + path + " is missing required fields: " + e.what());
  }
}

}  // namespace ratekit
