#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ratekit/metrics.hpp"
#include "ratekit/resample.hpp"
#include "testutil.hpp"

using namespace ratekit;

namespace {

// Direct-convolution reference, written from the siting definitions alone:
// taps are re-derived from the windowed-sinc formula, normalized in ascending
// offset order, and accumulated left to right, matching the library's
// arithmetic order so results must agree bit for bit.
std::vector<double> oracle_taps(double phase, int a, int& first) {
  first = -(a - 1);
  const int last = phase == 0.0 ? a - 1 : a;
  std::vector<double> w;
  double sum = 0.0;
  for (int off = first; off <= last; ++off) {
    const double x = double(off) - phase;
    double v;
    if (x == 0.0) {
      v = 1.0;
    } else {
      const double px = std::numbers::pi * x;
      v = a * std::sin(px) * std::sin(px / a) / (px * px);
    }
    w.push_back(v);
    sum += v;
  }
  for (double& t : w) t /= sum;
  return w;
}

std::uint16_t oracle_round_clip(double v, int bit_depth) {
  long r = std::lround(v);
  r = std::clamp(r, 0L, (1L << bit_depth) - 1);
  return std::uint16_t(r);
}

Plane oracle_pass(const Plane& p, bool horizontal, int out_len, double factor,
                  double site_offset) {
  const int cross = horizontal ? p.height : p.width;
  Plane out = make_plane(horizontal ? out_len : cross, horizontal ? cross : out_len, p.bit_depth);
  for (int c = 0; c < cross; ++c) {
    for (int j = 0; j < out_len; ++j) {
      const double site = factor * j + site_offset;
      const int base = int(std::floor(site));
      int first = 0;
      const std::vector<double> w = oracle_taps(site - base, 3, first);
      double acc = 0.0;
      for (std::size_t t = 0; t < w.size(); ++t) {
        const int src = base + first + int(t);
        acc += w[t] * (horizontal ? p.at_clamped(src, c) : p.at_clamped(c, src));
      }
      if (horizontal)
        out.at(j, c) = oracle_round_clip(acc, p.bit_depth);
      else
        out.at(c, j) = oracle_round_clip(acc, p.bit_depth);
    }
  }
  return out;
}

Plane oracle_down(const Plane& p) {
  Plane h = oracle_pass(p, true, p.width / 2, 2.0, 0.0);
  return oracle_pass(h, false, p.height / 2, 2.0, 0.5);
}

Plane oracle_up(const Plane& p) {
  Plane h = oracle_pass(p, true, p.width * 2, 0.5, 0.0);
  return oracle_pass(h, false, p.height * 2, 0.5, -0.25);
}

}  // namespace

TEST_CASE("aligned kernel reduces to a unit center tap", "[resample]") {
  LanczosKernel k = make_lanczos_kernel(3, 0.0);
  REQUIRE(k.taps.size() == 5);
  REQUIRE(k.first == -2);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.taps.size(); ++i) {
    sum += k.taps[i];
    if (i == 2)
      REQUIRE(k.taps[i] == Catch::Approx(1.0).margin(1e-12));
    else
      REQUIRE(std::abs(k.taps[i]) < 1e-12);
  }
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("half-phase kernel has six symmetric taps summing to one", "[resample]") {
  LanczosKernel k = make_lanczos_kernel(3, 0.5);
  REQUIRE(k.taps.size() == 6);
  double sum = 0.0;
  for (double t : k.taps) sum += t;
  REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
  for (int i = 0; i < 3; ++i)
    REQUIRE(k.taps[i] == Catch::Approx(k.taps[5 - i]).margin(1e-12));
  // Center pair dominates
  REQUIRE(k.taps[2] > 0.5);
}

TEST_CASE("kernel construction validates its arguments", "[resample]") {
  REQUIRE_THROWS_AS(make_lanczos_kernel(0, 0.0), ConfigError);
  REQUIRE_THROWS_AS(make_lanczos_kernel(3, 1.0), ConfigError);
  REQUIRE_THROWS_AS(make_lanczos_kernel(3, -0.1), ConfigError);
}

TEST_CASE("constant planes pass through both directions unchanged", "[resample]") {
  for (std::uint16_t v : {512, 7, 1023, 300}) {
    Plane flat = make_plane(8, 6, 10, v);
    Plane down = lanczos_downsample_2x(flat);
    REQUIRE(down.width == 4);
    REQUIRE(down.height == 3);
    for (auto s : down.data) REQUIRE(s == v);

    Plane up = lanczos_upsample_2x(down);
    REQUIRE(up.width == 8);
    REQUIRE(up.height == 6);
    for (auto s : up.data) REQUIRE(s == v);
  }
}

TEST_CASE("downsample rejects odd dimensions", "[resample]") {
  REQUIRE_THROWS_AS(lanczos_downsample_2x(make_plane(5, 4)), FormatError);
  REQUIRE_THROWS_AS(lanczos_downsample_2x(make_plane(4, 5)), FormatError);
}

TEST_CASE("downsample matches the direct-convolution reference exactly", "[resample]") {
  // Horizontal ramp, vertical ramp, and two noise planes
  Plane ramp_h = make_plane(16, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) ramp_h.at(x, y) = std::uint16_t(64 + 50 * x);
  Plane ramp_v = make_plane(16, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) ramp_v.at(x, y) = std::uint16_t(64 + 60 * y);

  for (const Plane& p :
       {ramp_h, ramp_v, testutil::noise_plane(16, 12, 5), testutil::noise_plane(32, 18, 6)}) {
    REQUIRE(lanczos_downsample_2x(p) == oracle_down(p));
  }
}

TEST_CASE("upsample matches the direct-convolution reference exactly", "[resample]") {
  for (const Plane& p : {testutil::noise_plane(8, 6, 9), testutil::smooth_plane(12, 10, 10)}) {
    REQUIRE(lanczos_upsample_2x(p) == oracle_up(p));
  }
}

TEST_CASE("even output columns of the upsampler copy their source sample", "[resample]") {
  // Horizontal siting x/2 puts even outputs exactly on source samples.
  Plane p = testutil::noise_plane(10, 1, 77);
  Plane up = detail::resample_axis(p, true, 20, 0.5, 0.0, 3);
  for (int x = 0; x < 10; ++x) REQUIRE(up.at(2 * x, 0) == p.at(x, 0));
}

TEST_CASE("down-then-up reconstruction of smooth content stays above 40 dB", "[resample]") {
  // An extra box pass strips most energy above the half-rate limit, which is
  // the content class the resampler is meant to carry faithfully.
  Plane p = testutil::box3(testutil::smooth_plane(64, 64, 0xBEA7));
  Plane rec = lanczos_upsample_2x(lanczos_downsample_2x(p));
  REQUIRE(rec.width == 64);
  REQUIRE(rec.height == 64);
  REQUIRE(psnr(p, rec) >= 40.0);
}
