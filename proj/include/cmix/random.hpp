#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cmix {

/// splitmix64 finalizer; used to spread replication indices over seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-replication seed: master ^ hash(rep).  Independent of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep) {
  return master ^ mix64(rep);
}

/// Seeded 64-bit generator with platform-stable variates.  The standard
/// distributions are implementation-defined, so variates are built
/// directly from the raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on 0..n-1 (n >= 1), rejection-sampled.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }

  /// Draw with density 0.75 (1 - u^2) on [-1, 1].
  double epanechnikov() {
    const double u1 = uniform(-1.0, 1.0);
    const double u2 = uniform(-1.0, 1.0);
    const double u3 = uniform(-1.0, 1.0);
    if (std::abs(u3) >= std::abs(u2) && std::abs(u3) >= std::abs(u1)) return u2;
    return u3;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cmix
