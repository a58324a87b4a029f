#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

#include "sarcasm/common/error.hpp"

namespace sarcasm {

// 64-bit FNV-1a; used for fingerprints and seed derivation, not security.
class Fingerprint {
 public:
  Fingerprint& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Fingerprint& add(std::span<const int> values) {
    for (int v : values) {
      for (int shift = 0; shift < 32; shift += 8) {
        state_ ^= static_cast<unsigned char>((static_cast<std::uint32_t>(v) >> shift) & 0xff);
        state_ *= 0x100000001b3ULL;
      }
    }
    return *this;
  }

  std::uint64_t value() const { return state_; }

  std::string hex() const {
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(state_));
    return buffer;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Fingerprint().add(bytes).hex();
}

}  // namespace sarcasm
