#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "ratekit/curve.hpp"
#include "testutil.hpp"

using namespace ratekit;

namespace {

RateQualityPoint pt(int qp, std::uint64_t bytes, double quality) {
  RateQualityPoint p;
  p.qp = qp;
  p.bytes = bytes;
  p.quality = quality;
  return p;
}

}  // namespace

TEST_CASE("decimal literals parse to reduced exact fractions", "[curve]") {
  Rational r = parse_decimal("0.075");
  REQUIRE(r.num == 3);
  REQUIRE(r.den == 40);

  r = parse_decimal("8");
  REQUIRE(r.num == 8);
  REQUIRE(r.den == 1);

  r = parse_decimal("12.5");
  REQUIRE(r.num == 25);
  REQUIRE(r.den == 2);

  r = parse_decimal("0.150");
  REQUIRE(r.num == 3);
  REQUIRE(r.den == 20);

  REQUIRE_THROWS_AS(parse_decimal(""), ConfigError);
  REQUIRE_THROWS_AS(parse_decimal("."), ConfigError);
  REQUIRE_THROWS_AS(parse_decimal("1.2.3"), ConfigError);
  REQUIRE_THROWS_AS(parse_decimal("-1"), ConfigError);
  REQUIRE_THROWS_AS(parse_decimal("1e3"), ConfigError);
  REQUIRE_THROWS_AS(parse_decimal("1234567890123456789"), ConfigError);
}

TEST_CASE("budgets for the default targets over an 87.8-megapixel set", "[curve]") {
  const std::uint64_t pixels = 87857152;
  REQUIRE(compute_budget("0.075", pixels).budget_bytes == 823660);
  REQUIRE(compute_budget("0.150", pixels).budget_bytes == 1647321);
  REQUIRE(compute_budget("0.300", pixels).budget_bytes == 3294643);
}

TEST_CASE("eight bits per pixel over a thousand pixels is a thousand bytes", "[curve]") {
  REQUIRE(compute_budget("8", 1000).budget_bytes == 1000);
}

TEST_CASE("budget floors consistently under doubling", "[curve]") {
  testutil::Lcg rng(0xB4D6E7);
  for (int i = 0; i < 2000; ++i) {
    Rational bpp;
    bpp.num = 1 + rng.below(99999);
    bpp.den = 1;
    for (std::uint64_t d = rng.below(7); d > 0; --d) bpp.den *= 10;
    bpp.reduce();
    const std::uint64_t pixels = 1 + rng.below(200000000);

    const std::uint64_t f = compute_budget(bpp, pixels).budget_bytes;
    Rational doubled{bpp.num * 2, bpp.den};
    const std::uint64_t f2 = compute_budget(doubled, pixels).budget_bytes;
    REQUIRE((f2 == 2 * f || f2 == 2 * f + 1));
  }
}

TEST_CASE("budget validation", "[curve]") {
  REQUIRE_THROWS_AS(compute_budget("0", 1000), ConfigError);
  REQUIRE_THROWS_AS(compute_budget("0.5", 0), ConfigError);
}

TEST_CASE("an already clean point set passes through pruning", "[curve]") {
  std::vector<RateQualityPoint> pts = {pt(47, 100, 50.0), pt(42, 200, 60.0), pt(37, 400, 70.0)};
  RateQualityCurve curve = build_curve("img", 10000, pts);
  REQUIRE(curve.image_id == "img");
  REQUIRE(curve.pixels == 10000);
  REQUIRE(curve.points.size() == 3);
  REQUIRE(curve.points[0] == pts[0]);
  REQUIRE(curve.points[2] == pts[2]);
  REQUIRE_NOTHROW(validate_curve(curve));
}

TEST_CASE("dominated and duplicate-size points are pruned", "[curve]") {
  // The 250-byte point scores below the cheaper 200-byte point, so it goes.
  RateQualityCurve curve =
      build_curve("img", 1, {pt(42, 200, 60.0), pt(47, 100, 50.0), pt(40, 250, 55.0)});
  REQUIRE(curve.points.size() == 2);
  REQUIRE(curve.points[0].bytes == 100);
  REQUIRE(curve.points[0].quality == 50.0);
  REQUIRE(curve.points[1].bytes == 200);
  REQUIRE(curve.points[1].quality == 60.0);

  // Equal sizes keep the higher quality
  RateQualityCurve ties = build_curve("img", 1, {pt(40, 100, 52.0), pt(41, 100, 58.0)});
  REQUIRE(ties.points.size() == 1);
  REQUIRE(ties.points[0].quality == 58.0);

  // Equal qualities keep the cheaper encode
  RateQualityCurve flat = build_curve("img", 1, {pt(40, 300, 55.0), pt(41, 200, 55.0)});
  REQUIRE(flat.points.size() == 1);
  REQUIRE(flat.points[0].bytes == 200);
}

TEST_CASE("pruning matches a brute-force dominance filter", "[curve]") {
  testutil::Lcg rng(0x9A3E70);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RateQualityPoint> pts;
    const int n = 1 + int(rng.below(12));
    for (int i = 0; i < n; ++i)
      pts.push_back(pt(int(rng.below(64)), 1 + rng.below(50), double(rng.below(20))));

    RateQualityCurve curve = build_curve("t", 1, pts);
    REQUIRE_NOTHROW(validate_curve(curve));

    // A point survives iff nothing cheaper-or-equal matches or beats its
    // quality, and nothing of the same size is strictly better.
    for (const RateQualityPoint& p : pts) {
      bool dominated = false;
      for (const RateQualityPoint& q : pts) {
        if (&q == &p) continue;
        if (q.bytes < p.bytes && q.quality >= p.quality) dominated = true;
        if (q.bytes == p.bytes && q.quality > p.quality) dominated = true;
      }
      const bool kept =
          std::find_if(curve.points.begin(), curve.points.end(), [&](const RateQualityPoint& k) {
            return k.bytes == p.bytes && k.quality == p.quality;
          }) != curve.points.end();
      if (!dominated) REQUIRE(kept);
      if (dominated) {
        // Dominated points may only appear if an identical twin survived.
        bool twin = false;
        for (const RateQualityPoint& q : pts)
          if (&q != &p && q.bytes == p.bytes && q.quality == p.quality) twin = true;
        if (!twin) REQUIRE_FALSE(kept);
      }
    }
  }
}

TEST_CASE("curve construction rejects bad points", "[curve]") {
  REQUIRE_THROWS_AS(build_curve("x", 1, {}), ConfigError);
  REQUIRE_THROWS_AS(build_curve("x", 1, {pt(40, 0, 50.0)}), FormatError);
  REQUIRE_THROWS_AS(build_curve("x", 1, {pt(40, 10, std::nan(""))}), FormatError);
  const double inf = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(build_curve("x", 1, {pt(40, 10, inf)}), FormatError);
}

TEST_CASE("validate_curve rejects non-monotone frontiers", "[curve]") {
  RateQualityCurve curve;
  curve.image_id = "bad";
  curve.points = {pt(47, 100, 50.0), pt(42, 200, 45.0)};
  REQUIRE_THROWS_AS(validate_curve(curve), FormatError);

  curve.points = {pt(47, 200, 50.0), pt(42, 100, 60.0)};
  REQUIRE_THROWS_AS(validate_curve(curve), FormatError);

  curve.points.clear();
  REQUIRE_THROWS_AS(validate_curve(curve), ConfigError);
}
