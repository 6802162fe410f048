#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "ratekit/errors.hpp"

namespace ratekit {

// FNV-1a, 64 bit. Content fingerprint for cache keys, not a cryptographic hash.
class Digest {
public:
  Digest& update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ull;
    }
    return *this;
  }

  Digest& update(std::string_view s) { return update(s.data(), s.size()); }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[i] = digits[(state_ >> (60 - 4 * i)) & 0xf];
    return out;
  }

private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

inline std::string digest_bytes(std::string_view bytes) {
  return Digest{}.update(bytes).hex();
}

inline std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for digest");
  Digest d;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) d.update(buf, std::size_t(in.gcount()));
  return d.hex();
}

}  // namespace ratekit
