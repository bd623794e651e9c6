#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gptpat::internal {

// SHA-256 of the input, lowercase hex.
std::string sha256_hex(std::string_view data);

// FNV-1a, used where a stable (cross-run, cross-platform) mix is needed.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL) {
  std::uint64_t hash = seed;
  for (char c : data) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace gptpat::internal
