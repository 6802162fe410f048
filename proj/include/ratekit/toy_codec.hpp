#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ratekit/bitio.hpp"
#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"

namespace ratekit {

/// Self-contained intra codec used as a stand-in for an external encoder:
/// 8x8 orthonormal DCT per plane, uniform scalar quantization with
/// step(qp) = 2^((qp-4)/6), zigzag scan, zero-run + signed exp-Golomb
/// entropy coding. Deterministic, lossless entropy stage, rate decreasing
/// in qp on natural content.

inline double toy_quant_step(int qp) {
  if (qp < 0 || qp > 63) throw ConfigError("toy codec qp must be in [0, 63]");
  return std::exp2((qp - 4) / 6.0);
}

namespace detail {

constexpr int kBlock = 8;
constexpr char kToyMagic[4] = {'R', 'T', 'C', '1'};
constexpr std::size_t kToyHeaderSize = 16;

/// Diagonal scan order: raster index of each scan position.
inline const std::array<int, 64>& zigzag_order() {
  static const std::array<int, 64> table = [] {
    std::array<int, 64> z{};
    int idx = 0;
    for (int s = 0; s <= 14; ++s) {
      if (s % 2) {
        for (int y = std::max(0, s - 7); y <= std::min(7, s); ++y) z[idx++] = y * 8 + (s - y);
      } else {
        for (int y = std::min(7, s); y >= std::max(0, s - 7); --y) z[idx++] = y * 8 + (s - y);
      }
    }
    return z;
  }();
  return table;
}

/// basis[k][n] = a(k) cos((2n+1) k pi / 16), orthonormal rows.
inline const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const std::array<std::array<double, 8>, 8> table = [] {
    std::array<std::array<double, 8>, 8> b{};
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 8; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) b[k][n] = a * std::cos((2 * n + 1) * k * pi / 16.0);
    }
    return b;
  }();
  return table;
}

inline void forward_dct_8x8(const double* in, double* out) {
  const auto& b = dct_basis();
  double tmp[64];
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 8; ++k) {
      double acc = 0.0;
      for (int n = 0; n < 8; ++n) acc += b[k][n] * in[y * 8 + n];
      tmp[y * 8 + k] = acc;
    }
  for (int k = 0; k < 8; ++k)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[u][y] * tmp[y * 8 + k];
      out[u * 8 + k] = acc;
    }
}

inline void inverse_dct_8x8(const double* in, double* out) {
  const auto& b = dct_basis();
  double tmp[64];
  for (int k = 0; k < 8; ++k)
    for (int y = 0; y < 8; ++y) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][y] * in[u * 8 + k];
      tmp[y * 8 + k] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int n = 0; n < 8; ++n) {
      double acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += b[k][n] * tmp[y * 8 + k];
      out[y * 8 + n] = acc;
    }
}

/// Per nonzero coefficient in scan order: ue(zero run + 1), then se(value).
/// ue(0) terminates the block early, so an all-zero block costs a single bit.
/// No terminator is written when the last nonzero coefficient sits at scan
/// position 63.
inline void write_block_coeffs(BitWriter& bw, const std::array<long, 64>& q) {
  const auto& zz = zigzag_order();
  int run = 0;
  for (int i = 0; i < 64; ++i) {
    const long v = q[zz[i]];
    if (v == 0) {
      ++run;
      continue;
    }
    bw.put_ue(std::uint64_t(run) + 1);
    bw.put_se(v);
    run = 0;
  }
  if (run > 0) bw.put_ue(0);
}

inline std::array<long, 64> read_block_coeffs(BitReader& br) {
  const auto& zz = zigzag_order();
  std::array<long, 64> q{};
  int pos = 0;
  while (pos < 64) {
    const std::uint64_t code = br.get_ue();
    if (code == 0) break;
    pos += int(code - 1);
    if (pos >= 64) throw FormatError("bitstream corrupt: coefficient run past block end");
    q[zz[pos]] = long(br.get_se());
    ++pos;
  }
  return q;
}

inline void encode_plane(BitWriter& bw, const Plane& p, double step, int center) {
  const int bw_blocks = (p.width + kBlock - 1) / kBlock;
  const int bh_blocks = (p.height + kBlock - 1) / kBlock;
  for (int by = 0; by < bh_blocks; ++by) {
    for (int bx = 0; bx < bw_blocks; ++bx) {
      double block[64], coef[64];
      for (int y = 0; y < kBlock; ++y)
        for (int x = 0; x < kBlock; ++x)
          block[y * 8 + x] = double(p.at_clamped(bx * kBlock + x, by * kBlock + y)) - center;
      forward_dct_8x8(block, coef);
      std::array<long, 64> q{};
      for (int i = 0; i < 64; ++i) q[i] = std::lround(coef[i] / step);
      write_block_coeffs(bw, q);
    }
  }
}

inline Plane decode_plane(BitReader& br, int width, int height, int bit_depth, double step,
                          int center) {
  Plane p = make_plane(width, height, bit_depth);
  const long maxv = (1L << bit_depth) - 1;
  const int bw_blocks = (width + kBlock - 1) / kBlock;
  const int bh_blocks = (height + kBlock - 1) / kBlock;
  for (int by = 0; by < bh_blocks; ++by) {
    for (int bx = 0; bx < bw_blocks; ++bx) {
      const std::array<long, 64> q = read_block_coeffs(br);
      double coef[64], block[64];
      for (int i = 0; i < 64; ++i) coef[i] = double(q[i]) * step;
      inverse_dct_8x8(coef, block);
      for (int y = 0; y < kBlock && by * kBlock + y < height; ++y)
        for (int x = 0; x < kBlock && bx * kBlock + x < width; ++x) {
          long v = std::lround(block[y * 8 + x]) + center;
          p.at(bx * kBlock + x, by * kBlock + y) =
              std::uint16_t(std::clamp(v, 0L, maxv));
        }
    }
  }
  return p;
}

inline void append_u16le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v & 0xff));
  out.push_back(std::uint8_t((v >> 8) & 0xff));
}

inline std::uint32_t read_u16le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8);
}

}  // namespace detail

inline std::vector<std::uint8_t> toy_encode(const Yuv420Picture& pic, int qp) {
  const double step = toy_quant_step(qp);
  validate_picture(pic);
  if (pic.y.width > 0xffff || pic.y.height > 0xffff)
    throw FormatError("toy codec supports dimensions up to 65535");

  std::vector<std::uint8_t> out(detail::kToyMagic, detail::kToyMagic + 4);
  detail::append_u16le(out, std::uint32_t(pic.y.width));
  detail::append_u16le(out, std::uint32_t(pic.y.height));
  detail::append_u16le(out, std::uint32_t(pic.orig_width));
  detail::append_u16le(out, std::uint32_t(pic.orig_height));
  out.push_back(std::uint8_t(qp));
  out.push_back(std::uint8_t(pic.bit_depth()));
  detail::append_u16le(out, 0);  // reserved

  const int center = 1 << (pic.bit_depth() - 1);
  BitWriter bw;
  detail::encode_plane(bw, pic.y, step, center);
  detail::encode_plane(bw, pic.cb, step, center);
  detail::encode_plane(bw, pic.cr, step, center);
  const std::vector<std::uint8_t> payload = bw.finish();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline Yuv420Picture toy_decode(const std::vector<std::uint8_t>& bitstream) {
  if (bitstream.size() < detail::kToyHeaderSize)
    throw FormatError("toy bitstream shorter than header");
  if (!std::equal(detail::kToyMagic, detail::kToyMagic + 4, bitstream.begin()))
    throw FormatError("toy bitstream has wrong magic");

  const std::uint8_t* h = bitstream.data();
  const int w = int(detail::read_u16le(h + 4));
  const int ht = int(detail::read_u16le(h + 6));
  const int ow = int(detail::read_u16le(h + 8));
  const int oh = int(detail::read_u16le(h + 10));
  const int qp = h[12];
  const int bd = h[13];
  if (w <= 0 || ht <= 0 || w % 2 != 0 || ht % 2 != 0)
    throw FormatError("toy bitstream header has invalid dimensions");
  if (bd < 8 || bd > 14) throw FormatError("toy bitstream header has invalid bit depth");

  const double step = toy_quant_step(qp);
  const int center = 1 << (bd - 1);
  BitReader br(bitstream.data() + detail::kToyHeaderSize,
               bitstream.size() - detail::kToyHeaderSize);

  Yuv420Picture pic;
  pic.y = detail::decode_plane(br, w, ht, bd, step, center);
  pic.cb = detail::decode_plane(br, w / 2, ht / 2, bd, step, center);
  pic.cr = detail::decode_plane(br, w / 2, ht / 2, bd, step, center);
  pic.orig_width = ow;
  pic.orig_height = oh;
  validate_picture(pic);
  return pic;
}

}  // namespace ratekit
