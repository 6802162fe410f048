#pragma once

#include <cmath>
#include <string>

#include "ratekit/errors.hpp"
#include "ratekit/image.hpp"
#include "ratekit/resample.hpp"

namespace ratekit {

/// BT.709 luma coefficients, limited-range quantization. The nominal 8-bit
/// ranges (16..235 luma, 16..240 chroma) scale by 2^(bit_depth-8).
struct ConversionParams {
  double kr = 0.2126;
  double kb = 0.0722;
  int bit_depth = 10;
};

/// Full-resolution YCbCr, one plane per component at the source dimensions.
struct Ycbcr444Image {
  Plane y;
  Plane cb;
  Plane cr;
};

namespace detail {

inline void check_conversion_params(const ConversionParams& p) {
  if (!(p.kr > 0.0) || !(p.kb > 0.0) || !(p.kr + p.kb < 1.0))
    throw ConfigError("conversion coefficients must satisfy kr>0, kb>0, kr+kb<1");
  if (p.bit_depth != 10) throw ConfigError("conversion supports 10-bit only");
}

inline std::uint16_t quantize_code(double v, int bit_depth) {
  long r = std::lround(v);
  const long maxv = (1L << bit_depth) - 1;
  if (r < 0) r = 0;
  if (r > maxv) r = maxv;
  return std::uint16_t(r);
}

}  // namespace detail

/// Per pixel, with R',G',B' = code/1023:
///   Y' = kr R' + (1-kr-kb) G' + kb B'
///   Cb = (B'-Y') / (2(1-kb)),  Cr = (R'-Y') / (2(1-kr))
/// quantized limited-range: Y = (219 Y' + 16)*s, C = (224 C + 128)*s with
/// s = 2^(bit_depth-8), rounded half away from zero and clipped.
inline Ycbcr444Image rgb_to_ycbcr709(const RgbImage& img, const ConversionParams& params = {}) {
  detail::check_conversion_params(params);
  if (img.bit_depth != params.bit_depth)
    throw FormatError("rgb_to_ycbcr709 expects " + std::to_string(params.bit_depth) +
                      "-bit input, got " + std::to_string(img.bit_depth));

  const double kr = params.kr, kb = params.kb;
  const double kg = 1.0 - kr - kb;
  const double scale = double(1 << (params.bit_depth - 8));
  const double maxcode = double(img.max_value());

  Ycbcr444Image out;
  out.y = make_plane(img.width, img.height, params.bit_depth);
  out.cb = make_plane(img.width, img.height, params.bit_depth);
  out.cr = make_plane(img.width, img.height, params.bit_depth);

  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double r = img.samples[3 * i] / maxcode;
    const double g = img.samples[3 * i + 1] / maxcode;
    const double b = img.samples[3 * i + 2] / maxcode;
    const double yp = kr * r + kg * g + kb * b;
    const double cb = (b - yp) / (2.0 * (1.0 - kb));
    const double cr = (r - yp) / (2.0 * (1.0 - kr));
    out.y.data[i] = detail::quantize_code((219.0 * yp + 16.0) * scale, params.bit_depth);
    out.cb.data[i] = detail::quantize_code((224.0 * cb + 128.0) * scale, params.bit_depth);
    out.cr.data[i] = detail::quantize_code((224.0 * cr + 128.0) * scale, params.bit_depth);
  }
  return out;
}

/// Exact algebraic inverse of the forward matrix on dequantized values,
/// rounded and clipped back to code range.
inline RgbImage ycbcr_to_rgb709(const Ycbcr444Image& img, const ConversionParams& params = {}) {
  detail::check_conversion_params(params);
  if (!img.y.same_size(img.cb) || !img.y.same_size(img.cr))
    throw FormatError("ycbcr_to_rgb709: plane dimensions differ");

  const double kr = params.kr, kb = params.kb;
  const double kg = 1.0 - kr - kb;
  const double scale = double(1 << (params.bit_depth - 8));
  const double maxcode = double((1 << params.bit_depth) - 1);

  RgbImage out;
  out.width = img.y.width;
  out.height = img.y.height;
  out.bit_depth = params.bit_depth;
  out.samples.resize(img.y.sample_count() * 3);

  for (std::size_t i = 0; i < img.y.sample_count(); ++i) {
    const double yp = (img.y.data[i] / scale - 16.0) / 219.0;
    const double cb = (img.cb.data[i] / scale - 128.0) / 224.0;
    const double cr = (img.cr.data[i] / scale - 128.0) / 224.0;
    const double r = yp + 2.0 * (1.0 - kr) * cr;
    const double b = yp + 2.0 * (1.0 - kb) * cb;
    const double g = (yp - kr * r - kb * b) / kg;
    out.samples[3 * i] = detail::quantize_code(r * maxcode, params.bit_depth);
    out.samples[3 * i + 1] = detail::quantize_code(g * maxcode, params.bit_depth);
    out.samples[3 * i + 2] = detail::quantize_code(b * maxcode, params.bit_depth);
  }
  return out;
}

/// Full forward pipeline: convert to YCbCr 4:4:4, pad every plane to even
/// dimensions, then halve the chroma resolution with the Lanczos resampler.
inline Yuv420Picture rgb_to_yuv420(const RgbImage& img, const ConversionParams& params = {},
                                   int lanczos_lobes = 3) {
  Ycbcr444Image full = rgb_to_ycbcr709(img, params);
  Yuv420Picture pic;
  pic.orig_width = img.width;
  pic.orig_height = img.height;
  pic.y = pad_to_even(full.y);
  pic.cb = lanczos_downsample_2x(pad_to_even(full.cb), lanczos_lobes);
  pic.cr = lanczos_downsample_2x(pad_to_even(full.cr), lanczos_lobes);
  return pic;
}

/// Inverse pipeline: upsample chroma back to the padded luma resolution, crop
/// all planes to the original dimensions, convert to RGB.
inline RgbImage yuv420_to_rgb(const Yuv420Picture& pic, const ConversionParams& params = {},
                              int lanczos_lobes = 3) {
  validate_picture(pic);
  Ycbcr444Image full;
  full.y = crop(pic.y, pic.orig_width, pic.orig_height);
  full.cb = crop(lanczos_upsample_2x(pic.cb, lanczos_lobes), pic.orig_width, pic.orig_height);
  full.cr = crop(lanczos_upsample_2x(pic.cr, lanczos_lobes), pic.orig_width, pic.orig_height);
  return ycbcr_to_rgb709(full, params);
}

}  // namespace ratekit
