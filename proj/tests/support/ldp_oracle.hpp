#pragma once

// Rejection-sampling oracle for conditional event times of a linear death
// process: Gillespie-simulate n0 particles with per-particle rate mu on
// (t_l, t_u], keep runs with exactly n_deaths deaths, return the sorted death
// times. Used to check the truncated-exponential order-statistics claim.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pdsir/rng.hpp"

namespace testsupport {

struct LdpConfig {
  int n0 = 4;
  double mu = 1.0;
  double t_lower = 0.0;
  double t_upper = 1.0;
  int n_deaths = 2;
};

// one accepted run's sorted death times, or empty if rejected
inline std::vector<double> ldp_run(const LdpConfig& cfg, pdsir::Rng& rng) {
  std::vector<double> deaths;
  double t = cfg.t_lower;
  int alive = cfg.n0;
  while (alive > 0) {
    t += rng.exponential(cfg.mu * static_cast<double>(alive));
    if (t > cfg.t_upper) break;
    deaths.push_back(t);
    --alive;
    if (static_cast<int>(deaths.size()) > cfg.n_deaths) return {};  // early reject
  }
  if (static_cast<int>(deaths.size()) != cfg.n_deaths) return {};
  return deaths;  // generated in increasing order already
}

inline std::vector<std::vector<double>> ldp_accepted_runs(const LdpConfig& cfg, int wanted,
                                                          pdsir::Rng& rng,
                                                          std::int64_t max_tries = 500000000) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(wanted));
  for (std::int64_t tries = 0; tries < max_tries && static_cast<int>(out.size()) < wanted;
       ++tries) {
    auto run = ldp_run(cfg, rng);
    if (!run.empty()) out.push_back(std::move(run));
  }
  return out;
}

}  // namespace testsupport
