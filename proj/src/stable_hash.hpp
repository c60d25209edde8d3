#pragma once

#include <cstdint>
#include <string_view>

namespace implcons::detail {

// FNV-1a; std::hash is not stable across standard libraries and the
// random flip draws and feature dropout masks must be reproducible.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash of a sequence of strings under a seed; separators keep ("ab","c")
/// and ("a","bc") apart.
template <typename... Parts>
std::uint64_t keyed_hash(std::uint64_t seed, const Parts&... parts) {
  std::uint64_t h = mix64(seed);
  ((h = fnv1a(std::string_view(parts), h), h = fnv1a(std::string_view("\x1f", 1), h)), ...);
  return mix64(h);
}

/// Uniform double in [0, 1) from a 64-bit hash.
inline double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace implcons::detail
