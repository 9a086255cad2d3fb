#pragma once

#include <cstdint>

// Counter-based pseudo-random stream: output i is mix64(seed + (i+1) * GAMMA)
// with the SplitMix64 finalizer constants (Steele, Lea & Flood). Stateless
// given (seed, counter), so records are reproducible from their embedded seed
// alone; the wrapper below documents the order in which derived variates
// consume raw counters.

namespace tltk {

std::uint64_t mix64(std::uint64_t z);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // Raw counter-indexed word.
  std::uint64_t next_u64();

  // Uniform double in (0, 1]: ((word >> 11) + 1) * 2^-53. One counter.
  double next_unit();

  // Standard normal via Box-Muller (cosine branch). Two counters.
  double next_normal();

  // Poisson variate: CDF inversion for mean < 30 (one counter), otherwise
  // Hormann's PTRS transformed rejection (two counters per trial).
  std::int64_t next_poisson(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace tltk
