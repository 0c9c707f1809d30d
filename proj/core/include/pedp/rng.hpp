#pragma once

#include <cstdint>
#include <random>

namespace pedp {

// Seeded random stream. Uniform draws are derived from the raw 64-bit engine
// output rather than std::uniform_real_distribution, so a given seed produces
// the same stream on every standard library implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is negligible for the small n used here.
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derives an independent child stream; successive splits differ.
  Rng split() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

private:
  std::mt19937_64 eng_;
};

}  // namespace pedp
