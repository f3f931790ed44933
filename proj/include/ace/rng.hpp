#pragma once

#include <cstdint>

namespace ace::rng {

/// splitmix64 finalizer. Used for seed derivation only.
std::uint64_t mix64(std::uint64_t x);

/// xoshiro256** with a splitmix64-filled state. Self-contained so that
/// streams are bit-identical across platforms and standard libraries.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [0, bound), bound >= 1. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1), 53 random bits.
  double unit();

 private:
  std::uint64_t s_[4];
};

/// Independent generator for one indexed unit of work (an iteration, a
/// cell). Results depend only on (seed, index), so any partition of the
/// index space across threads replays the same streams.
Xoshiro256 substream(std::uint64_t seed, std::uint64_t index);

/// Exact binomial(n, p) sample. Inversion for small n*p, BTPE otherwise;
/// O(1) expected time for large n. Throws std::invalid_argument unless
/// n >= 0 and p is a probability.
std::int64_t binomial(Xoshiro256& gen, std::int64_t n, double p);

}  // namespace ace::rng
