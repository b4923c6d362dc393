#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace qls {

// SplitMix64. Uniforms take the top 53 bits; each normal draw consumes two
// uniforms (Box-Muller, cosine branch only), so draw counts are fixed.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64+boxmuller-cos";

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Independent child stream; advances this one by a single draw.
  Rng split() { return Rng(next_u64()); }

 private:
  std::uint64_t state_;
};

}  // namespace qls
