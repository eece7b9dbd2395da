#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace prophet {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded random stream. All draws are built from raw mt19937_64 words, so a
// given (seed, stream, trial) triple reproduces the same sequence on any
// platform. Each Monte Carlo trial gets its own stream, which makes results
// independent of scheduling and worker count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng for_trial(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0xa0761d6478bd642full * (stream + 1)));
    h = splitmix64(h ^ (0xe7037ed1a0b428dbull * (trial + 1)));
    return Rng(h);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform01_open_low() { return 1.0 - uniform01(); }

  std::uint64_t below(std::uint64_t n) {
    std::uint64_t k = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  bool coin() { return uniform01() < 0.5; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01_open_low()));
    const double a = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Marsaglia-Tsang; any shape > 0, unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double boost = std::pow(uniform01_open_low(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform01_open_low();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace prophet
