#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"

namespace ratekit {

namespace detail {

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

inline const char* color_type_name(int t) {
  switch (t) {
    case PNG_COLOR_TYPE_GRAY: return "grayscale";
    case PNG_COLOR_TYPE_GRAY_ALPHA: return "grayscale+alpha";
    case PNG_COLOR_TYPE_PALETTE: return "palette";
    case PNG_COLOR_TYPE_RGB: return "RGB";
    case PNG_COLOR_TYPE_RGB_ALPHA: return "RGBA";
    default: return "unknown";
  }
}

}  // namespace detail

/// Loads an 8- or 16-bit RGB(A) PNG as a 10-bit image. Alpha is discarded.
/// 8-bit samples are promoted by a left shift of 2, 16-bit samples reduced by
/// a right shift of 6, so code values stay exact.
inline RgbImage load_png(const std::filesystem::path& path) {
  detail::FileCloser file{std::fopen(path.string().c_str(), "rb")};
  if (!file.f) throw IoError("cannot open " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, file.f) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw FormatError(path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng initialisation failed");
  }

  std::vector<png_byte> rowdata;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng failed to decode " + path.string());
  }

  png_init_io(png, file.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_RGB_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": unsupported color type " +
                      std::string(detail::color_type_name(color_type)) +
                      " (expected RGB or RGBA)");
  }
  if (bit_depth != 8 && bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": unsupported bit depth " + std::to_string(bit_depth) +
                      " (expected 8 or 16)");
  }

  if (color_type == PNG_COLOR_TYPE_RGB_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  rowdata.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = rowdata.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RgbImage img;
  img.width = int(width);
  img.height = int(height);
  img.bit_depth = 10;
  img.samples.resize(std::size_t(width) * height * 3);

  std::size_t out = 0;
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = rowdata.data() + y * rowbytes;
    if (bit_depth == 8) {
      for (png_uint_32 x = 0; x < width * 3; ++x)
        img.samples[out++] = std::uint16_t(row[x]) << 2;
    } else {
      // 16-bit PNG samples are big-endian
      for (png_uint_32 x = 0; x < width * 3; ++x) {
        const std::uint16_t v = std::uint16_t((row[2 * x] << 8) | row[2 * x + 1]);
        img.samples[out++] = std::uint16_t(v >> 6);
      }
    }
  }
  return img;
}

/// Writes a 10-bit image as a 16-bit RGB PNG (samples shifted left by 6, so a
/// later load_png recovers the codes exactly). 8-bit images are written as-is.
inline void save_png(const RgbImage& img, const std::filesystem::path& path) {
  if (img.bit_depth != 8 && img.bit_depth != 10)
    throw FormatError("save_png: unsupported bit depth " + std::to_string(img.bit_depth));
  if (img.samples.size() != img.pixel_count() * 3)
    throw FormatError("save_png: sample buffer does not match dimensions");

  detail::FileCloser file{std::fopen(path.string().c_str(), "wb")};
  if (!file.f) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }

  const int out_depth = img.bit_depth == 8 ? 8 : 16;
  std::vector<png_byte> rowdata;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed to encode " + path.string());
  }

  png_init_io(png, file.f);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), out_depth,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t rowbytes = std::size_t(img.width) * 3 * (out_depth / 8);
  rowdata.resize(rowbytes * img.height);
  rows.resize(img.height);
  std::size_t in = 0;
  for (int y = 0; y < img.height; ++y) {
    png_byte* row = rowdata.data() + std::size_t(y) * rowbytes;
    rows[y] = row;
    if (out_depth == 8) {
      for (int x = 0; x < img.width * 3; ++x) row[x] = png_byte(img.samples[in++] & 0xff);
    } else {
      for (int x = 0; x < img.width * 3; ++x) {
        const std::uint16_t v = std::uint16_t(img.samples[in++] << 6);
        row[2 * x] = png_byte(v >> 8);
        row[2 * x + 1] = png_byte(v & 0xff);
      }
    }
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace ratekit
