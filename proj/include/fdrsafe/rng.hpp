#pragma once

#include <cstdint>
#include <random>

namespace fdrsafe {

// Derives an independent stream seed from a master seed. splitmix64 of
// master + stream * golden-ratio increment; stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// mt19937_64 with explicit, portable transforms. The standard library's
// distribution objects are implementation-defined, so every draw here is
// spelled out to keep seeded results reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t integer(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; keeps the spare deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  // Chi-squared with 3 degrees of freedom.
  double chi2_3() {
    const double a = normal(), b = normal(), c = normal();
    return a * a + b * b + c * c;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fdrsafe
