#pragma once

#include <cstdint>
#include <string_view>

namespace openloop {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a of a tag string.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Independent stream seed: mix64(master ^ fnv1a64(tag)).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return mix64(master ^ fnv1a64(tag));
}

/// Per-candidate environment seed: mix64(mix64(mix64(master) ^ generation) ^ id).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t generation,
                                                  std::uint64_t candidate) {
  return mix64(mix64(mix64(master) ^ generation) ^ candidate);
}

}  // namespace openloop
