#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace commonlibs {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
  return hash;
}

// FNV-1a 64 over the tokens joined by the ASCII unit separator (0x1F).
// Stored descriptors depend on this exact definition.
std::uint64_t token_digest(std::span<const std::string> tokens);

} // namespace commonlibs
