#pragma once

// Brute-force oracles over latent paths, independent of the library's event
// sweep: compartment counts by direct counting and a midpoint-rule integral
// of S(t)I(t).

#include <cmath>
#include <cstdint>

#include "pdsir/model.hpp"
#include "pdsir/rng.hpp"

namespace testsupport {

inline std::int64_t brute_s(const pdsir::LatentPath& p, double t) {
  std::int64_t infected = 0;
  for (std::int64_t j = p.i0; j < p.size(); ++j)
    if (p.infection_time[static_cast<std::size_t>(j)] <= t) ++infected;
  return p.s0 - infected;
}

inline std::int64_t brute_i(const pdsir::LatentPath& p, double t) {
  std::int64_t count = 0;
  for (std::int64_t j = 0; j < p.size(); ++j)
    if (p.infection_time[static_cast<std::size_t>(j)] <= t &&
        !(p.removal_time[static_cast<std::size_t>(j)] <= t))
      ++count;
  return count;
}

inline std::int64_t brute_r(const pdsir::LatentPath& p, double t) {
  std::int64_t count = 0;
  for (std::int64_t j = 0; j < p.size(); ++j)
    if (p.removal_time[static_cast<std::size_t>(j)] <= t) ++count;
  return count;
}

// Midpoint quadrature of S(t)I(t) with the given step. Exact (up to float
// accumulation) when every event time is a multiple of 10*step, since jumps
// then always land on cell boundaries.
inline double quadrature_integral_si(const pdsir::LatentPath& p, double step) {
  double sum = 0.0;
  const auto cells = static_cast<std::int64_t>(std::round(p.horizon / step));
  for (std::int64_t c = 0; c < cells; ++c) {
    const double mid = (static_cast<double>(c) + 0.5) * step;
    sum += static_cast<double>(brute_s(p, mid)) * static_cast<double>(brute_i(p, mid));
  }
  return sum * step;
}

// Sum of log I(t^-) over infection events, counted directly; removals at the
// same timestamp are applied first. Returns -inf when any infection sees I=0.
inline double brute_sum_log_i_before_infection(const pdsir::LatentPath& p) {
  double sum = 0.0;
  for (std::int64_t j = p.i0; j < p.size(); ++j) {
    const double t = p.infection_time[static_cast<std::size_t>(j)];
    std::int64_t i_before = 0;
    for (std::int64_t m = 0; m < p.size(); ++m) {
      if (m == j) continue;
      const double zi = p.infection_time[static_cast<std::size_t>(m)];
      const double zr = p.removal_time[static_cast<std::size_t>(m)];
      if (zi < t && !(zr <= t)) ++i_before;  // removal at exactly t fires first
    }
    if (i_before == 0) return -std::numeric_limits<double>::infinity();
    sum += std::log(static_cast<double>(i_before));
  }
  return sum;
}

// Random valid path with event times snapped to multiples of `snap`.
inline pdsir::LatentPath random_small_path(pdsir::Rng& rng, double snap = 0.0) {
  pdsir::LatentPath p;
  p.s0 = 5 + static_cast<std::int64_t>(rng.bounded_int(10));
  p.i0 = 1 + static_cast<std::int64_t>(rng.bounded_int(3));
  p.horizon = 1.0 + rng.uniform01() * 2.0;
  if (snap > 0.0) p.horizon = std::round(p.horizon / snap) * snap;
  const auto n_inf = static_cast<std::int64_t>(
      rng.bounded_int(static_cast<std::uint64_t>(std::min<std::int64_t>(8, p.s0 + 1))));
  const auto snapped = [&](double lo, double hi) {
    double t = rng.uniform(lo, hi);
    if (snap > 0.0) t = std::clamp(std::round(t / snap) * snap, lo + snap, hi);
    return t;
  };
  for (std::int64_t j = 0; j < p.i0 + n_inf; ++j) {
    const double zi = j < p.i0 ? 0.0 : snapped(0.0, p.horizon);
    double zr = pdsir::kInf;
    if (rng.uniform01() < 0.7) {
      zr = zi + rng.exponential(1.5);
      if (snap > 0.0) zr = std::round(zr / snap) * snap;
      if (zr <= zi || zr > p.horizon) zr = pdsir::kInf;
    }
    p.infection_time.push_back(zi);
    p.removal_time.push_back(zr);
    p.interval.push_back(j < p.i0 ? -1 : 0);
  }
  return p;
}

}  // namespace testsupport
