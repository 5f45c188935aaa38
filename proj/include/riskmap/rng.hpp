#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace riskmap {

// Deterministic random source. The engine (mt19937_64) has a fully specified
// output stream; the distributions are hand-rolled on top of it, so the same
// seed yields the same values on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Gaussian via the Marsaglia polar method; caches the spare deviate.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + stddev * u * f;
  }

  // Unbiased uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = max % bound;
    if (rem == bound - 1) return engine_() % bound;  // bound divides 2^64
    const std::uint64_t cutoff = max - rem;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= cutoff);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace riskmap
