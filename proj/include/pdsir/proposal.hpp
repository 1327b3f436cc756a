#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdsir/distributions.hpp"
#include "pdsir/model.hpp"
#include "pdsir/rng.hpp"

namespace pdsir {

struct ProposalConfig {
  double rho = 1.0;  // fraction of infected individuals refreshed per update, in (0, 1]

  void validate() const {
    if (!(rho > 0.0) || rho > 1.0)
      throw std::invalid_argument("ProposalConfig: rho must lie in (0, 1]");
  }
};

struct ProposalResult {
  LatentPath path;
  double log_q_forward = 0.0;
  /// Indices whose coordinates were refreshed: the initial infectives plus
  /// the selected subset, ascending.
  std::vector<std::int64_t> updated;
};

namespace detail {

// Draw from the mixed removal law (1 - p) delta_inf + p TruncWeibull(0, T - z_i)
// with p = F(T - z_i); returns the removal time and adds the collapsed density
// term (log f for removed, log survival for censored) to log_q.
inline double sample_mixed_removal(double infection_time, double horizon, const Params& p,
                                   Rng& rng, double& log_q) {
  const double window = horizon - infection_time;
  const double prob_removed = weibull_cdf(window, p.lambda, p.shape_a);
  const double u = rng.uniform01();
  if (u >= prob_removed) {
    log_q += weibull_logsurvival(window, p.lambda, p.shape_a);
    return kInf;
  }
  const double duration =
      sample_trunc_weibull({p.lambda, p.shape_a, 0.0, window}, rng);
  const double removal = infection_time + duration;
  // evaluate the density on the round-tripped duration so that a later
  // proposal_logdensity(path) call reproduces log_q bit for bit
  log_q += weibull_logpdf(removal - infection_time, p.lambda, p.shape_a);
  return removal;
}

inline double mixed_removal_logdensity(double infection_time, double removal_time,
                                       double horizon, const Params& p) {
  if (removal_time <= horizon)
    return weibull_logpdf(removal_time - infection_time, p.lambda, p.shape_a);
  return weibull_logsurvival(horizon - infection_time, p.lambda, p.shape_a);
}

// Individuals of each observation interval, ascending by index.
inline std::vector<std::vector<std::int64_t>> bucket_by_interval(const LatentPath& path,
                                                                 std::int64_t num_intervals) {
  std::vector<std::vector<std::int64_t>> buckets(static_cast<std::size_t>(num_intervals));
  for (std::int64_t j = path.i0; j < path.size(); ++j) {
    const std::int32_t k = path.interval[static_cast<std::size_t>(j)];
    if (k < 0 || k >= num_intervals)
      throw std::invalid_argument("proposal: path individual carries no valid interval tag");
    buckets[static_cast<std::size_t>(k)].push_back(j);
  }
  return buckets;
}

using RemovalHeap = std::priority_queue<double, std::vector<double>, std::greater<double>>;

inline std::int64_t pop_until(RemovalHeap& heap, double t) {
  while (!heap.empty() && heap.top() <= t) heap.pop();
  return static_cast<std::int64_t>(heap.size());
}

}  // namespace detail

/// Refreshes the coordinates in `selection` (ascending indices of infected
/// individuals; the initial infectives are always refreshed in addition).
/// Interval assignments are kept, which is what preserves Y.
///
/// The per-interval rate is mu_k = beta * I(t_{k-1}) computed causally from
/// the hybrid path: retained individuals keep their current times, already
/// refreshed individuals (earlier intervals and the initial infectives) use
/// their new times. Individuals of intervals >= k cannot be infectious at
/// t_{k-1} under either coordinate set, so mu_k equals the value recomputed
/// from the finished path; proposal_logdensity relies on this.
inline ProposalResult propose_with_selection(const LatentPath& current,
                                             std::span<const std::int64_t> selection,
                                             const ObservationGrid& grid, const Params& params,
                                             Rng& rng) {
  params.validate();
  const std::int64_t K = grid.num_intervals();

  ProposalResult out;
  out.path = current;
  out.updated.reserve(static_cast<std::size_t>(current.i0) + selection.size());

  std::vector<char> selected(static_cast<std::size_t>(current.size()), 0);
  for (const auto idx : selection) {
    if (idx < current.i0 || idx >= current.size())
      throw std::invalid_argument("propose_with_selection: selection must index infected individuals");
    selected[static_cast<std::size_t>(idx)] = 1;
  }

  detail::RemovalHeap active;
  for (std::int64_t j = 0; j < current.i0; ++j) {
    const double rem = detail::sample_mixed_removal(0.0, current.horizon, params, rng,
                                                    out.log_q_forward);
    out.path.removal_time[static_cast<std::size_t>(j)] = rem;
    active.push(rem);
    out.updated.push_back(j);
  }

  const auto buckets = detail::bucket_by_interval(current, K);
  for (std::int64_t k = 0; k < K; ++k) {
    const double lo = grid.left(k);
    const double hi = grid.right(k);
    const double mu = params.beta * static_cast<double>(detail::pop_until(active, lo));
    const TruncExpParams law{mu, lo, hi};
    for (const auto j : buckets[static_cast<std::size_t>(k)]) {
      if (selected[static_cast<std::size_t>(j)]) {
        const double zi = sample_trunc_exp(law, rng);
        out.log_q_forward += trunc_exp_logpdf(zi, law);
        out.path.infection_time[static_cast<std::size_t>(j)] = zi;
        out.path.removal_time[static_cast<std::size_t>(j)] = detail::sample_mixed_removal(
            zi, current.horizon, params, rng, out.log_q_forward);
        out.updated.push_back(j);
      }
      active.push(out.path.removal_time[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

/// Generates a full PD-SIR path consistent with y from scratch: I_k infection
/// times i.i.d. TrunExp(mu_k; t_{k-1}, t_k) per interval (exchangeable, no
/// sorting needed) and removal times from the mixed law.
inline ProposalResult propose_full(const IncidenceCounts& y, const ObservationGrid& grid,
                                   const Params& params, std::int64_t i0, std::int64_t s0,
                                   Rng& rng) {
  y.validate(grid);
  if (i0 < 1) throw std::invalid_argument("propose_full: i0 >= 1 required");
  if (y.total() > s0)
    throw std::invalid_argument("propose_full: total incidence exceeds s0");

  LatentPath skeleton;
  skeleton.s0 = s0;
  skeleton.i0 = i0;
  skeleton.horizon = grid.horizon();
  const std::int64_t n_total = i0 + y.total();
  skeleton.infection_time.reserve(static_cast<std::size_t>(n_total));
  skeleton.removal_time.reserve(static_cast<std::size_t>(n_total));
  skeleton.interval.reserve(static_cast<std::size_t>(n_total));
  for (std::int64_t j = 0; j < i0; ++j) {
    skeleton.infection_time.push_back(0.0);
    skeleton.removal_time.push_back(kInf);
    skeleton.interval.push_back(-1);
  }
  std::vector<std::int64_t> selection;
  selection.reserve(static_cast<std::size_t>(y.total()));
  for (std::int64_t k = 0; k < grid.num_intervals(); ++k) {
    for (std::int64_t c = 0; c < y.counts[static_cast<std::size_t>(k)]; ++c) {
      selection.push_back(skeleton.size());
      // placeholder coordinates; refreshed below
      skeleton.infection_time.push_back(grid.right(k));
      skeleton.removal_time.push_back(kInf);
      skeleton.interval.push_back(static_cast<std::int32_t>(k));
    }
  }
  return propose_with_selection(skeleton, selection, grid, params, rng);
}

/// rho-subset update: refreshes ceil(rho * n_I) infected individuals chosen
/// uniformly at random without replacement (plus the initial infectives).
inline ProposalResult propose_subset_n(const LatentPath& current, std::int64_t refresh_count,
                                       const ObservationGrid& grid, const Params& params,
                                       Rng& rng) {
  const std::int64_t n_i = current.n_infected();
  if (refresh_count < 0 || refresh_count > n_i)
    throw std::invalid_argument("propose_subset_n: refresh count out of range");
  // partial Fisher-Yates over the infected indices
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n_i));
  for (std::int64_t j = 0; j < n_i; ++j) pool[static_cast<std::size_t>(j)] = current.i0 + j;
  std::vector<std::int64_t> selection(static_cast<std::size_t>(refresh_count));
  for (std::int64_t t = 0; t < refresh_count; ++t) {
    const auto pick = t + static_cast<std::int64_t>(
                              rng.bounded_int(static_cast<std::uint64_t>(n_i - t)));
    std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick)]);
    selection[static_cast<std::size_t>(t)] = pool[static_cast<std::size_t>(t)];
  }
  std::sort(selection.begin(), selection.end());
  return propose_with_selection(current, selection, grid, params, rng);
}

inline ProposalResult propose_subset(const LatentPath& current, const IncidenceCounts& y,
                                     const ObservationGrid& grid, const Params& params,
                                     const ProposalConfig& cfg, Rng& rng) {
  cfg.validate();
  y.validate(grid);
  const std::int64_t n_i = current.n_infected();
  const std::int64_t m =
      n_i == 0 ? 0
               : std::min<std::int64_t>(
                     n_i, static_cast<std::int64_t>(
                              std::ceil(cfg.rho * static_cast<double>(n_i))));
  return propose_subset_n(current, m, grid, params, rng);
}

/// Log density of the refreshed coordinates of `path` under the PD-SIR
/// proposal, with every mu_k recomputed deterministically from the path
/// itself. Pure evaluation, usable for both the forward and the reverse term
/// of the acceptance ratio. -inf when a coordinate lies outside its
/// interval's support.
inline double proposal_logdensity(const LatentPath& path,
                                  std::span<const std::int64_t> updated,
                                  const ObservationGrid& grid, const Params& params) {
  params.validate();
  const std::int64_t K = grid.num_intervals();

  std::vector<char> is_updated(static_cast<std::size_t>(path.size()), 0);
  for (const auto idx : updated) {
    if (idx < 0 || idx >= path.size())
      throw std::invalid_argument("proposal_logdensity: updated index out of range");
    is_updated[static_cast<std::size_t>(idx)] = 1;
  }

  double log_q = 0.0;
  for (std::int64_t j = 0; j < path.i0; ++j)
    if (is_updated[static_cast<std::size_t>(j)])
      log_q += detail::mixed_removal_logdensity(0.0, path.removal_time[static_cast<std::size_t>(j)],
                                                path.horizon, params);

  detail::RemovalHeap active;
  for (std::int64_t j = 0; j < path.i0; ++j)
    active.push(path.removal_time[static_cast<std::size_t>(j)]);

  const auto buckets = detail::bucket_by_interval(path, K);
  for (std::int64_t k = 0; k < K; ++k) {
    const double lo = grid.left(k);
    const double hi = grid.right(k);
    const double mu = params.beta * static_cast<double>(detail::pop_until(active, lo));
    const TruncExpParams law{mu, lo, hi};
    for (const auto j : buckets[static_cast<std::size_t>(k)]) {
      const double zi = path.infection_time[static_cast<std::size_t>(j)];
      if (is_updated[static_cast<std::size_t>(j)]) {
        log_q += trunc_exp_logpdf(zi, law);
        log_q += detail::mixed_removal_logdensity(zi, path.removal_time[static_cast<std::size_t>(j)],
                                                  path.horizon, params);
      }
      active.push(path.removal_time[static_cast<std::size_t>(j)]);
    }
  }
  return log_q;
}

}  // namespace pdsir
