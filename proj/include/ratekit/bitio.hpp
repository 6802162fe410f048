#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "ratekit/errors.hpp"

namespace ratekit {

/// MSB-first bit packer. `finish` pads the final partial byte with zeros.
class BitWriter {
 public:
  void put_bit(int b) {
    cur_ = std::uint8_t((cur_ << 1) | (b & 1));
    if (++nbits_ == 8) {
      bytes_.push_back(cur_);
      cur_ = 0;
      nbits_ = 0;
    }
  }

  void put_bits(std::uint64_t value, int count) {
    for (int i = count - 1; i >= 0; --i) put_bit(int((value >> i) & 1));
  }

  /// Order-0 exp-Golomb: for v >= 0, emit bit_width(v+1)-1 zeros followed by
  /// v+1 in as many bits. 0 -> "1", 1 -> "010", 2 -> "011".
  void put_ue(std::uint64_t v) {
    const std::uint64_t code = v + 1;
    const int n = std::bit_width(code);
    put_bits(0, n - 1);
    put_bits(code, n);
  }

  /// Signed values interleave as 0, 1, -1, 2, -2, ...: v maps to 2v-1 when
  /// positive and -2v otherwise.
  void put_se(std::int64_t v) {
    put_ue(v > 0 ? std::uint64_t(v) * 2 - 1 : std::uint64_t(-v) * 2);
  }

  std::vector<std::uint8_t> finish() {
    while (nbits_ != 0) put_bit(0);
    return std::move(bytes_);
  }

  std::size_t bit_count() const { return bytes_.size() * 8 + nbits_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint8_t cur_ = 0;
  int nbits_ = 0;
};

/// MSB-first reader over a byte buffer. Reading past the end throws.
class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit BitReader(const std::vector<std::uint8_t>& bytes)
      : BitReader(bytes.data(), bytes.size()) {}

  int get_bit() {
    if (pos_ >= size_ * 8) throw FormatError("bitstream truncated");
    const int b = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return b;
  }

  std::uint64_t get_bits(int count) {
    std::uint64_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | std::uint64_t(get_bit());
    return v;
  }

  std::uint64_t get_ue() {
    int zeros = 0;
    while (get_bit() == 0) {
      if (++zeros > 63) throw FormatError("bitstream corrupt: exp-Golomb prefix too long");
    }
    return ((std::uint64_t(1) << zeros) | get_bits(zeros)) - 1;
  }

  std::int64_t get_se() {
    const std::uint64_t u = get_ue();
    return (u & 1) ? std::int64_t((u + 1) / 2) : -std::int64_t(u / 2);
  }

  std::size_t bit_position() const { return pos_; }
  std::size_t bits_left() const { return size_ * 8 - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace ratekit
