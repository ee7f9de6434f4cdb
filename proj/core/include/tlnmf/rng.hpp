#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tlnmf {

/// Derives the per-realization seed: seed_s = splitmix64(seed ^ (s+1)*phi64).
/// Fixing this derivation (rather than drawing realizations from one stream)
/// lets realizations be generated independently and in parallel.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t s) {
  std::uint64_t z = seed ^ ((s + 1) * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded generator with a fully pinned draw layout:
///  - uniform(): one mt19937_64 word, mapped to [0,1) with 53-bit resolution;
///  - normal(): Box-Muller pairs, two uniforms per pair, cos variate first;
///  - gamma(a, theta): Marsaglia-Tsang (one normal + one uniform per
///    acceptance round; the a < 1 case boosts through a+1 and consumes one
///    extra uniform).
/// The variate order, not the stdlib, defines the stream, so identical seeds
/// give bit-identical sequences on any platform with IEEE-754 doubles.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double boost = std::pow(uniform_pos(), 1.0 / shape);
      return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tlnmf
