#pragma once

#include <cstdint>

// Self-contained RNG so that results are reproducible byte for byte from a
// recorded seed, independent of the standard library's distribution
// implementations. The generator is xoshiro256++ (Blackman & Vigna), seeded
// through splitmix64.

namespace tdlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);

  std::uint64_t next_u64();

  // uniform in [0, 1), 53-bit mantissa
  double uniform();

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), n > 0; unbiased (Lemire with rejection)
  std::uint64_t uniform_below(std::uint64_t n);

  // uniform integer in [lo, hi] inclusive
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // standard normal via Box-Muller; consumes two uniforms per value
  double normal();
  double normal(double mean, double std) { return mean + std * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t s_[4];
};

// splitmix64 step, also used on its own for stateless hashing of packed keys
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash64(std::uint64_t x);

}  // namespace tdlab
