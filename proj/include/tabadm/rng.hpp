#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tabadm/types.hpp"

namespace tabadm {

/// Deterministic pseudo-random source used everywhere randomness is needed.
///
/// The generator is xoshiro256** (Blackman & Vigna), seeded by expanding a
/// 64-bit seed with splitmix64. Both are pure integer recurrences, so the
/// stream is identical on every platform. Gaussian variates come from a
/// Box-Muller transform that consumes exactly two uniforms per draw (the
/// sine branch is discarded), which keeps the draw count per entry fixed
/// and the stream position predictable.
///
/// Single-owner: not copyable. Construct one per independent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng(const Rng&) = delete;
  Rng& operator=(const Rng&) = delete;
  Rng(Rng&&) = default;
  Rng& operator=(Rng&&) = default;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Next raw 64-bit word of the xoshiro256** stream.
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal draw. Exactly two uniforms consumed per call.
  double normal();

  /// Uniform integer in {0, ..., n-1}. n must be >= 1. Uses the modulo
  /// reduction; the bias is below n / 2^64 and irrelevant at the scales
  /// used here.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Matrix of i.i.d. standard normals, entries drawn in row-major order.
  Matrix gaussian(Index rows, Index cols);

  /// Vector of i.i.d. standard normals.
  Vector gaussian_vector(Index n);

  /// Random permutation of {0, ..., n-1} via Fisher-Yates.
  std::vector<Index> permutation(Index n);

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
};

}  // namespace tabadm
