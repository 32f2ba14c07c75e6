#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cvb {

/// Lower median (element (n-1)/2 of the sorted sequence). Takes its input by
/// value because it reorders it. Precondition: non-empty.
inline double lower_median(std::vector<double> values) {
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

/// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a over the bytes of a string; stable per-key seed material.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Unbiased integer in [0, bound) from a 64-bit engine by rejection. Draws are
/// identical across standard libraries, unlike std::uniform_int_distribution.
template <typename Engine>
std::uint64_t uniform_index(Engine& engine, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t r;
  do {
    r = engine();
  } while (r >= limit);
  return r % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
template <typename Engine>
double uniform_unit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace cvb
