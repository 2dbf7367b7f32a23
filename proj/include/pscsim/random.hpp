#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pscsim/core.hpp"

namespace pscsim {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Seedable deterministic generator. All simulation randomness goes through
// this class so runs reproduce bit for bit: mt19937_64 is fully specified by
// the standard and the samplers below avoid std::*_distribution, whose
// output is implementation-defined. Streams let independent consumers (one
// per node) draw without perturbing each other.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(detail::splitmix64(detail::splitmix64(seed) ^ stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  /// Gaussian via Box-Muller (cosine branch); consumes exactly two uniforms.
  double normal(double mu, double sigma) {
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// Serializable scalar distribution for speeds, directions and start times.
struct ScalarDist {
  enum class Kind { constant, uniform, normal };

  Kind kind = Kind::constant;
  double a = 0.0;  // constant value | uniform lo | normal mean
  double b = 0.0;  // uniform hi | normal std

  static ScalarDist constant(double v) { return {Kind::constant, v, 0.0}; }
  static ScalarDist uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static ScalarDist normal(double mu, double sigma) { return {Kind::normal, mu, sigma}; }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::constant: return a;
      case Kind::uniform: return rng.uniform(a, b);
      case Kind::normal: return rng.normal(a, b);
    }
    throw SimError("ScalarDist: bad kind");
  }

  bool operator==(const ScalarDist&) const = default;
};

}  // namespace pscsim
