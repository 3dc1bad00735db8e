#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace spl {

/// Deterministic generator used for every random quantity in the project.
///
/// Algorithm: xoshiro256** (Blackman & Vigna), state seeded by four
/// successive SplitMix64 outputs starting from the 64-bit seed.
///   uniform()      = (next() >> 11) * 2^-53, in [0, 1)
///   normal()       = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one uniform pair per
///                    draw (Box-Muller, sine branch discarded)
///   below(bound)   = rejection sampling on next() with threshold
///                    (2^64 - bound) mod bound, then next() mod bound
/// The sequence depends only on the seed, so golden files are portable.
/// tests/oracles/oracle.py carries an independent transcription.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle of 0..n-1, walking i from n-1 down to 1 and
  /// swapping with below(i + 1).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// One SplitMix64 step: the finalizer applied to x + 0x9E3779B97F4A7C15.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the `index`-th independent stream under `master`:
/// splitmix64(master ^ (0x9E3779B97F4A7C15 * (index + 1))).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace spl
