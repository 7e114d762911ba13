#pragma once

#include <cmath>
#include <cstdint>

namespace flowda {

// Counter-based generator: SplitMix64 over (seed, counter), Gaussian deviates
// via Box-Muller. Being counter-based, any sample can be regenerated from its
// index alone, so noise vectors are reproducible regardless of evaluation
// order or threading.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  // Uniform in (0, 1].
  double uniform(std::uint64_t counter) const {
    const std::uint64_t bits = splitmix64(seed_ ^ splitmix64(counter));
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal; consumes counters 2k and 2k+1.
  double gaussian(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
};

}  // namespace flowda
