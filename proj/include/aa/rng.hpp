#pragma once

#include <array>
#include <cstdint>

namespace aa {

/// Portable seeded generator: xoshiro256** (Blackman & Vigna) with the
/// 256-bit state expanded from the 64-bit seed by splitmix64. The integer
/// stream is bit-identical on every platform; normals use Box-Muller on top
/// of it, so they are identical up to the platform's libm rounding.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Standard normal deviate.
  double normal();

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace aa
