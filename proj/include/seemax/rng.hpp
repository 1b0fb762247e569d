#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace seemax {

// Deterministic splittable generator (splitmix64 core). Streams obtained via
// stream(seed, {ids...}) are reproducible across platforms, runs, and thread
// schedules; results never depend on call interleaving between streams.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Independent stream keyed by a seed and a path of ids.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = mix(seed);
    for (std::uint64_t id : ids) s = mix(s ^ mix(id));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1].
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal, Box-Muller with the second draw cached.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692528676655900577 * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal with E|z|^2 = variance.
  std::complex<double> cnormal(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = s * normal();
    const double im = s * normal();
    return {re, im};
  }

 private:
  std::uint64_t state_;
  bool has_cache_ = false;
  double cache_ = 0.0;
};

}  // namespace seemax
