#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ratekit/errors.hpp"

namespace ratekit {

/// Single image plane, row-major integer code values.
struct Plane {
  int width = 0;
  int height = 0;
  int bit_depth = 10;
  std::vector<std::uint16_t> data;

  std::uint16_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }

  /// Sample with replicated edges: out-of-range coordinates clamp to the border.
  std::uint16_t at_clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width) x = width - 1;
    if (y < 0) y = 0;
    if (y >= height) y = height - 1;
    return at(x, y);
  }

  std::uint16_t max_value() const { return std::uint16_t((1u << bit_depth) - 1); }
  std::size_t sample_count() const { return std::size_t(width) * height; }
  bool same_size(const Plane& o) const { return width == o.width && height == o.height; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

inline Plane make_plane(int width, int height, int bit_depth = 10, std::uint16_t fill = 0) {
  Plane p;
  p.width = width;
  p.height = height;
  p.bit_depth = bit_depth;
  p.data.assign(std::size_t(width) * height, fill);
  return p;
}

/// Interleaved R,G,B code values.
struct RgbImage {
  int width = 0;
  int height = 0;
  int bit_depth = 10;
  std::vector<std::uint16_t> samples;  // width*height*3, R,G,B order

  std::size_t pixel_count() const { return std::size_t(width) * height; }
  std::uint16_t max_value() const { return std::uint16_t((1u << bit_depth) - 1); }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Planar 4:2:0 picture. Luma is padded to even dimensions; the original
/// (pre-padding) dimensions are kept so decodes can be cropped back.
struct Yuv420Picture {
  Plane y;
  Plane cb;
  Plane cr;
  int orig_width = 0;
  int orig_height = 0;

  int bit_depth() const { return y.bit_depth; }

  friend bool operator==(const Yuv420Picture&, const Yuv420Picture&) = default;
};

inline void validate_picture(const Yuv420Picture& pic) {
  if (pic.y.width % 2 != 0 || pic.y.height % 2 != 0)
    throw FormatError("luma plane dimensions must be even, got " + std::to_string(pic.y.width) +
                      "x" + std::to_string(pic.y.height));
  if (pic.cb.width != pic.y.width / 2 || pic.cb.height != pic.y.height / 2 ||
      pic.cr.width != pic.y.width / 2 || pic.cr.height != pic.y.height / 2)
    throw FormatError("chroma planes must be exactly half the luma resolution");
  if (pic.orig_width < pic.y.width - 1 || pic.orig_width > pic.y.width ||
      pic.orig_height < pic.y.height - 1 || pic.orig_height > pic.y.height)
    throw FormatError("original dimensions may differ from padded ones by at most one pixel");
}

/// Replicate the last column/row once so both dimensions come out even.
/// Identity on planes that are already even-sized.
inline Plane pad_to_even(const Plane& p) {
  if (p.width <= 0 || p.height <= 0) throw FormatError("pad_to_even: empty plane");
  const int out_w = p.width + (p.width % 2);
  const int out_h = p.height + (p.height % 2);
  if (out_w == p.width && out_h == p.height) return p;
  Plane out = make_plane(out_w, out_h, p.bit_depth);
  for (int y = 0; y < out_h; ++y) {
    const int sy = y < p.height ? y : p.height - 1;
    for (int x = 0; x < out_w; ++x) {
      const int sx = x < p.width ? x : p.width - 1;
      out.at(x, y) = p.at(sx, sy);
    }
  }
  return out;
}

/// Top-left region of the plane at the original dimensions.
inline Plane crop(const Plane& p, int orig_width, int orig_height) {
  if (orig_width > p.width || orig_height > p.height)
    throw FormatError("crop: requested " + std::to_string(orig_width) + "x" +
                      std::to_string(orig_height) + " exceeds plane " + std::to_string(p.width) +
                      "x" + std::to_string(p.height));
  if (orig_width <= 0 || orig_height <= 0) throw FormatError("crop: empty target");
  if (orig_width == p.width && orig_height == p.height) return p;
  Plane out = make_plane(orig_width, orig_height, p.bit_depth);
  for (int y = 0; y < orig_height; ++y)
    for (int x = 0; x < orig_width; ++x) out.at(x, y) = p.at(x, y);
  return out;
}

// Raw container consumed by reference encoders: planar Y, Cb, Cr, each sample
// one 16-bit little-endian word holding a 10-bit value, no header.

inline void write_yuv_raw(const Yuv420Picture& pic, const std::filesystem::path& path) {
  validate_picture(pic);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::vector<unsigned char> buf;
  for (const Plane* plane : {&pic.y, &pic.cb, &pic.cr}) {
    buf.resize(plane->data.size() * 2);
    for (std::size_t i = 0; i < plane->data.size(); ++i) {
      buf[2 * i] = static_cast<unsigned char>(plane->data[i] & 0xff);
      buf[2 * i + 1] = static_cast<unsigned char>(plane->data[i] >> 8);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!out) throw IoError("short write to " + path.string());
}

/// Reads a raw 4:2:0 file of the given padded dimensions. The original
/// dimensions default to the padded ones; pass them when a sidecar knows better.
inline Yuv420Picture read_yuv_raw(const std::filesystem::path& path, int width, int height,
                                  int orig_width = -1, int orig_height = -1) {
  if (width <= 0 || height <= 0 || width % 2 != 0 || height % 2 != 0)
    throw FormatError("read_yuv_raw: padded dimensions must be positive and even");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::uint64_t actual = std::uint64_t(in.tellg());
  const std::uint64_t luma = std::uint64_t(width) * height;
  const std::uint64_t expected = (luma + luma / 2) * 2;
  if (actual != expected)
    throw FormatError("raw YUV size mismatch for " + path.string() + ": expected " +
                      std::to_string(expected) + " bytes, got " + std::to_string(actual));
  in.seekg(0);

  Yuv420Picture pic;
  pic.y = make_plane(width, height);
  pic.cb = make_plane(width / 2, height / 2);
  pic.cr = make_plane(width / 2, height / 2);
  pic.orig_width = orig_width < 0 ? width : orig_width;
  pic.orig_height = orig_height < 0 ? height : orig_height;

  std::vector<unsigned char> buf;
  for (Plane* plane : {&pic.y, &pic.cb, &pic.cr}) {
    buf.resize(plane->data.size() * 2);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) throw IoError("short read from " + path.string());
    for (std::size_t i = 0; i < plane->data.size(); ++i)
      plane->data[i] = std::uint16_t(buf[2 * i] | (buf[2 * i + 1] << 8));
  }
  validate_picture(pic);
  return pic;
}

}  // namespace ratekit
