#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace pdsir {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream (replicate r of a run seeded with `seed`).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Seedable RNG with in-house samplers. Every draw is a deterministic
// function of the engine stream, so runs are bit-reproducible given
// (seed, config) on any platform; std::*_distribution is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lower, double upper) {
    return lower + uniform01() * (upper - lower);
  }

  /// Uniform integer in [0, n). Lemire's multiply-with-rejection, exact.
  std::uint64_t bounded_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded_int: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (-n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Gamma draw in the shape-rate parameterization (mean shape/rate).
  /// Marsaglia-Tsang squeeze for shape >= 1; the shape < 1 boost runs in log
  /// space and clamps at DBL_MIN so tiny shapes never underflow to zero.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      const double u = uniform01();
      const double log_draw = std::log(g) + std::log(u) / shape - std::log(rate);
      return std::max(std::exp(log_draw), std::numeric_limits<double>::min());
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      const double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  /// Weibull draw with CDF F(x) = 1 - exp(-lambda x^a).
  double weibull(double lambda, double a) {
    return std::pow(exponential(1.0) / lambda, 1.0 / a);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pdsir
