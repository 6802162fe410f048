#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ratekit/metrics.hpp"
#include "ratekit/toy_codec.hpp"
#include "testutil.hpp"

using namespace ratekit;

namespace {

Yuv420Picture picture_from_luma(Plane y) {
  Yuv420Picture pic;
  pic.orig_width = y.width;
  pic.orig_height = y.height;
  pic.cb = make_plane(y.width / 2, y.height / 2, 10, 512);
  pic.cr = make_plane(y.width / 2, y.height / 2, 10, 512);
  pic.y = std::move(y);
  return pic;
}

double picture_mse(const Yuv420Picture& a, const Yuv420Picture& b) {
  const double sse = detail::plane_sse(a.y, b.y) + detail::plane_sse(a.cb, b.cb) +
                     detail::plane_sse(a.cr, b.cr);
  const double n =
      double(a.y.sample_count() + a.cb.sample_count() + a.cr.sample_count());
  return sse / n;
}

}  // namespace

TEST_CASE("quantizer step doubles every six steps", "[toycodec]") {
  REQUIRE(toy_quant_step(4) == 1.0);
  REQUIRE(toy_quant_step(10) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(toy_quant_step(22) == Catch::Approx(8.0).margin(1e-12));
  for (int qp = 0; qp < 63; ++qp) REQUIRE(toy_quant_step(qp) < toy_quant_step(qp + 1));
  REQUIRE_THROWS_AS(toy_quant_step(-1), ConfigError);
  REQUIRE_THROWS_AS(toy_quant_step(64), ConfigError);
}

TEST_CASE("transform round trip is numerically clean", "[toycodec]") {
  testutil::Lcg rng(0xDC7);
  double block[64], coef[64], back[64];
  for (int i = 0; i < 64; ++i) block[i] = double(rng.below(1024)) - 512.0;
  detail::forward_dct_8x8(block, coef);
  detail::inverse_dct_8x8(coef, back);
  for (int i = 0; i < 64; ++i) REQUIRE(back[i] == Catch::Approx(block[i]).margin(1e-9));
}

TEST_CASE("transform preserves energy", "[toycodec]") {
  testutil::Lcg rng(0xE4E);
  double block[64], coef[64];
  for (int i = 0; i < 64; ++i) block[i] = double(rng.below(1024)) - 512.0;
  detail::forward_dct_8x8(block, coef);
  double e_in = 0.0, e_out = 0.0;
  for (int i = 0; i < 64; ++i) {
    e_in += block[i] * block[i];
    e_out += coef[i] * coef[i];
  }
  REQUIRE(e_out == Catch::Approx(e_in).epsilon(1e-12));
}

TEST_CASE("zigzag scan visits each coefficient once, diagonally", "[toycodec]") {
  const auto& zz = detail::zigzag_order();
  std::array<bool, 64> seen{};
  for (int i = 0; i < 64; ++i) {
    REQUIRE(!seen[zz[i]]);
    seen[zz[i]] = true;
  }
  REQUIRE(zz[0] == 0);   // DC first
  REQUIRE(zz[1] == 1);   // (1,0)
  REQUIRE(zz[2] == 8);   // (0,1)
  REQUIRE(zz[3] == 16);  // (0,2)
  REQUIRE(zz[63] == 63);
}

TEST_CASE("block coefficient coding round trips", "[toycodec]") {
  testutil::Lcg rng(0x10AD);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<long, 64> q{};
    const int density = trial % 5;
    for (int i = 0; i < 64; ++i) {
      if (rng.below(5) <= std::uint64_t(density))
        q[i] = long(rng.below(4001)) - 2000;
    }
    if (trial == 0) q.fill(0);
    if (trial == 1) {
      q.fill(0);
      q[63] = 9;  // forces a value at the last scan position
    }

    BitWriter bw;
    detail::write_block_coeffs(bw, q);
    std::vector<std::uint8_t> bytes = bw.finish();
    BitReader br(bytes);
    REQUIRE(detail::read_block_coeffs(br) == q);
  }
}

TEST_CASE("an all-zero block costs one bit", "[toycodec]") {
  std::array<long, 64> q{};
  BitWriter bw;
  detail::write_block_coeffs(bw, q);
  REQUIRE(bw.bit_count() == 1);
}

TEST_CASE("constant pictures reconstruct exactly and compress hard", "[toycodec]") {
  Yuv420Picture pic = picture_from_luma(make_plane(32, 32, 10, 512));
  std::vector<std::uint8_t> bits = toy_encode(pic, 30);
  // 16 blocks luma + 2x4 chroma blocks, one bit each, plus the header
  REQUIRE(bits.size() < 16 + 8);
  Yuv420Picture rec = toy_decode(bits);
  REQUIRE(rec == pic);
}

TEST_CASE("header carries geometry, qp, and bit depth", "[toycodec]") {
  Plane y = testutil::smooth_plane(10, 6, 21);
  Yuv420Picture pic = picture_from_luma(std::move(y));
  pic.orig_width = 9;
  pic.orig_height = 5;

  std::vector<std::uint8_t> bits = toy_encode(pic, 33);
  REQUIRE(bits[0] == 'R');
  REQUIRE(bits[1] == 'T');
  REQUIRE(bits[2] == 'C');
  REQUIRE(bits[3] == '1');
  REQUIRE(bits[12] == 33);
  REQUIRE(bits[13] == 10);

  Yuv420Picture rec = toy_decode(bits);
  REQUIRE(rec.y.width == 10);
  REQUIRE(rec.y.height == 6);
  REQUIRE(rec.orig_width == 9);
  REQUIRE(rec.orig_height == 5);
  REQUIRE(rec.bit_depth() == 10);
}

TEST_CASE("unit quantizer step keeps every sample within one code", "[toycodec]") {
  Yuv420Picture pic = testutil::test_picture(48, 32, 0xF00D);
  Yuv420Picture rec = toy_decode(toy_encode(pic, 4));
  const std::pair<const Plane*, const Plane*> planes[] = {
      {&pic.y, &rec.y}, {&pic.cb, &rec.cb}, {&pic.cr, &rec.cr}};
  for (const auto& [a, b] : planes) {
    int max_err = 0;
    for (std::size_t i = 0; i < a->data.size(); ++i)
      max_err = std::max(max_err, std::abs(int(a->data[i]) - int(b->data[i])));
    REQUIRE(max_err <= 1);
  }
}

TEST_CASE("coarser quantization costs fewer bytes and more error", "[toycodec]") {
  Yuv420Picture pic = testutil::test_picture(64, 48, 0xCAFE);
  std::vector<std::uint8_t> fine = toy_encode(pic, 20);
  std::vector<std::uint8_t> coarse = toy_encode(pic, 40);
  REQUIRE(coarse.size() < fine.size());
  REQUIRE(picture_mse(pic, toy_decode(coarse)) > picture_mse(pic, toy_decode(fine)));
}

TEST_CASE("decode rejects malformed bitstreams", "[toycodec]") {
  Yuv420Picture pic = testutil::test_picture(16, 16, 3);
  std::vector<std::uint8_t> bits = toy_encode(pic, 28);

  std::vector<std::uint8_t> magic = bits;
  magic[0] = 'X';
  REQUIRE_THROWS_AS(toy_decode(magic), FormatError);

  std::vector<std::uint8_t> shorty(bits.begin(), bits.begin() + 10);
  REQUIRE_THROWS_AS(toy_decode(shorty), FormatError);

  std::vector<std::uint8_t> chopped(bits.begin(), bits.end() - (bits.size() - 16) / 2 - 1);
  REQUIRE_THROWS_AS(toy_decode(chopped), FormatError);

  std::vector<std::uint8_t> badqp = bits;
  badqp[12] = 99;
  REQUIRE_THROWS_AS(toy_decode(badqp), ConfigError);

  std::vector<std::uint8_t> baddepth = bits;
  baddepth[13] = 3;
  REQUIRE_THROWS_AS(toy_decode(baddepth), FormatError);
}

TEST_CASE("encode validates picture geometry and qp", "[toycodec]") {
  Yuv420Picture pic = testutil::test_picture(16, 16, 4);
  REQUIRE_THROWS_AS(toy_encode(pic, 64), ConfigError);
  REQUIRE_THROWS_AS(toy_encode(pic, -1), ConfigError);

  Yuv420Picture bad = pic;
  bad.cb = make_plane(4, 4);
  REQUIRE_THROWS_AS(toy_encode(bad, 30), FormatError);
}

TEST_CASE("partial boundary blocks reconstruct consistently", "[toycodec]") {
  // 10x6 luma and 5x3 chroma exercise partial blocks on both axes.
  Yuv420Picture pic = testutil::test_picture(9, 5, 0xB10C);
  REQUIRE(pic.y.width == 10);
  REQUIRE(pic.y.height == 6);
  Yuv420Picture rec = toy_decode(toy_encode(pic, 4));
  REQUIRE(rec.y.width == 10);
  double max_err = 0.0;
  for (std::size_t i = 0; i < pic.y.data.size(); ++i)
    max_err = std::max(max_err, std::abs(double(pic.y.data[i]) - double(rec.y.data[i])));
  REQUIRE(max_err <= 1.0);
}

TEST_CASE("decoding is deterministic", "[toycodec]") {
  Yuv420Picture pic = testutil::test_picture(32, 24, 0xD0D0);
  std::vector<std::uint8_t> bits = toy_encode(pic, 35);
  REQUIRE(toy_encode(pic, 35) == bits);
  REQUIRE(toy_decode(bits) == toy_decode(bits));
}
