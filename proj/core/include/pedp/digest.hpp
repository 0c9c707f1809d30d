#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace pedp {

// 64-bit FNV-1a, used for vocabulary digests, config digests, and checkpoint
// payload checksums. Stable across platforms.
inline std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(0xcbf29ce484222325ull, s.data(), s.size());
}

inline std::string to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string digest_string(const std::string& s) { return to_hex(fnv1a(s)); }

}  // namespace pedp
