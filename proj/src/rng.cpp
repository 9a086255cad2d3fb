#include "tltk/rng.hpp"

#include <cmath>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"

namespace tltk {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ull);
}

double RandomStream::next_unit() {
  return ((next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::next_normal() {
  const double u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * constants::pi * u2);
}

std::int64_t RandomStream::next_poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    throw ValidationError("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // CDF inversion with a single uniform.
    const double u = next_unit();
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf && k < 3000) {
      ++k;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }
  // PTRS rejection (Hormann 1993), consuming two uniforms per trial.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (int trial = 0; trial < 10000; ++trial) {
    double u = next_unit() - 0.5;
    const double v = next_unit();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + k * log_mean - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::int64_t>(k);
  }
  throw NumericError("poisson: rejection sampler failed to accept");
}

}  // namespace tltk
