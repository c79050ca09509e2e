#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ekb {

/// Identifier recorded alongside every fit so runs can be reproduced:
/// mt19937_64 streams keyed by SplitMix64(seed ^ FNV-1a(label)), doubles
/// taken from the top 53 bits.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-fnv1a/u53";

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic stream for (seed, label). The label keeps streams for
/// different terms independent of the order in which they are visited.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view label) : engine_(splitmix64(seed ^ fnv1a(label))) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; avoids the implementation-defined
  /// std::normal_distribution.
  double normal();

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ekb
