#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pdsir/model.hpp"
#include "pdsir/rng.hpp"

namespace pdsir {

struct SimConfig {
  std::int64_t s0 = 0;
  std::int64_t i0 = 1;
  Params params;
  double horizon = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (s0 < 0 || i0 < 1 || !(horizon > 0.0))
      throw std::invalid_argument("SimConfig: s0 >= 0, i0 >= 1 and horizon > 0 required");
    params.validate();
  }
};

/// Exact event-driven simulation of the non-Markovian stochastic SIR.
///
/// Removal times are scheduled once at infection (infectious periods are
/// i.i.d. Weibull draws and cannot be redrawn); the next-infection clock is
/// exponential with rate beta*S*I and is redrawn after every event, which is
/// valid because the infection hazard is constant while S and I are constant.
/// Removals fire before infections at tied timestamps. Individuals still
/// infectious at the horizon get removal_time = inf.
inline LatentPath simulate_sir(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const double T = cfg.horizon;
  const double beta = cfg.params.beta;

  LatentPath path;
  path.s0 = cfg.s0;
  path.i0 = cfg.i0;
  path.horizon = T;

  // min-heap of (scheduled removal time, individual index)
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> removals;

  auto add_individual = [&](double infection_time, std::int32_t interval) {
    path.infection_time.push_back(infection_time);
    path.removal_time.push_back(kInf);  // finalized when the removal fires
    path.interval.push_back(interval);
    const std::int64_t idx = path.size() - 1;
    const double rem = infection_time + rng.weibull(cfg.params.lambda, cfg.params.shape_a);
    removals.push({rem, idx});
  };

  for (std::int64_t j = 0; j < cfg.i0; ++j) add_individual(0.0, -1);

  std::int64_t s = cfg.s0;
  std::int64_t i = cfg.i0;
  double t = 0.0;
  while (i > 0) {
    const double rate = beta * static_cast<double>(s) * static_cast<double>(i);
    const double next_infection = rate > 0.0 ? t + rng.exponential(rate) : kInf;
    const double next_removal = removals.top().first;
    if (next_removal <= next_infection) {
      if (next_removal > T) break;
      t = next_removal;
      path.removal_time[static_cast<std::size_t>(removals.top().second)] = t;
      removals.pop();
      --i;
    } else {
      if (next_infection > T) break;
      t = next_infection;
      add_individual(t, -2);  // interval tag filled in by simulate_dataset
      --s;
      ++i;
    }
  }
  return path;
}

inline LatentPath simulate_sir(const SimConfig& cfg) {
  Rng rng(cfg.seed);
  return simulate_sir(cfg, rng);
}

/// Simulates a path and bins its infections on the grid. The path's interval
/// tags are filled in from the grid so the result is proposal-ready.
inline std::pair<LatentPath, IncidenceCounts> simulate_dataset(const SimConfig& cfg,
                                                               const ObservationGrid& grid,
                                                               Rng& rng) {
  if (grid.horizon() != cfg.horizon)
    throw std::invalid_argument("simulate_dataset: grid horizon must equal cfg horizon");
  LatentPath path = simulate_sir(cfg, rng);
  for (std::int64_t j = path.i0; j < path.size(); ++j)
    path.interval[static_cast<std::size_t>(j)] =
        static_cast<std::int32_t>(grid.interval_of(path.infection_time[static_cast<std::size_t>(j)]));
  IncidenceCounts y = bin_infections(path, grid);
  return {std::move(path), std::move(y)};
}

inline std::pair<LatentPath, IncidenceCounts> simulate_dataset(const SimConfig& cfg,
                                                               const ObservationGrid& grid) {
  Rng rng(cfg.seed);
  return simulate_dataset(cfg, grid, rng);
}

struct ConditionedDataset {
  LatentPath path;
  IncidenceCounts counts;
  std::int64_t attempts = 0;
};

/// Resamples until the epidemic reaches `min_final_size` infections,
/// mirroring scenario selection on non-extinct outbreaks.
inline ConditionedDataset simulate_dataset_conditional(const SimConfig& cfg,
                                                       const ObservationGrid& grid,
                                                       std::int64_t min_final_size, Rng& rng,
                                                       std::int64_t max_attempts = 100000) {
  for (std::int64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    auto [path, y] = simulate_dataset(cfg, grid, rng);
    if (path.n_infected() >= min_final_size)
      return {std::move(path), std::move(y), attempt};
  }
  throw std::runtime_error(
      "simulate_dataset_conditional: no epidemic reached the requested final size");
}

}  // namespace pdsir
