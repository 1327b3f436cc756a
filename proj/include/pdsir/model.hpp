#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdsir/distributions.hpp"

namespace pdsir {

/// Model parameters: per-pair infection rate beta, Weibull scale lambda and
/// fixed shape a for the infectious-period distribution F(x) = 1 - e^{-lambda x^a}.
struct Params {
  double beta = 0.0;
  double lambda = 0.0;
  double shape_a = 1.0;

  void validate() const {
    if (!(beta > 0.0) || !(lambda > 0.0) || !(shape_a > 0.0))
      throw std::invalid_argument("Params: beta, lambda and shape_a must be positive");
  }
};

/// Gamma hyperparameters of the independent priors on beta and lambda.
struct PriorHyper {
  double a_beta = 0.01;
  double b_beta = 1.0;
  double a_lambda = 0.01;
  double b_lambda = 1.0;

  void validate() const {
    if (!(a_beta > 0.0) || !(b_beta > 0.0) || !(a_lambda > 0.0) || !(b_lambda > 0.0))
      throw std::invalid_argument("PriorHyper: all hyperparameters must be positive");
  }
};

/// Observation grid 0 = t_0 < t_1 < ... < t_K = T; interval k (0-based) is
/// the half-open set (t_k, t_{k+1}].
class ObservationGrid {
 public:
  explicit ObservationGrid(std::vector<double> breakpoints)
      : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.size() < 2)
      throw std::invalid_argument("ObservationGrid: need at least t_0 and t_1");
    if (breakpoints_.front() != 0.0)
      throw std::invalid_argument("ObservationGrid: t_0 must be 0");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw std::invalid_argument("ObservationGrid: breakpoints must be strictly increasing");
  }

  static ObservationGrid regular(double horizon, std::int64_t k) {
    if (!(horizon > 0.0) || k < 1)
      throw std::invalid_argument("ObservationGrid::regular: horizon > 0 and k >= 1 required");
    std::vector<double> b(static_cast<std::size_t>(k) + 1);
    for (std::int64_t i = 0; i <= k; ++i)
      b[static_cast<std::size_t>(i)] = horizon * static_cast<double>(i) / static_cast<double>(k);
    b.back() = horizon;
    return ObservationGrid(std::move(b));
  }

  std::int64_t num_intervals() const {
    return static_cast<std::int64_t>(breakpoints_.size()) - 1;
  }
  double horizon() const { return breakpoints_.back(); }
  double left(std::int64_t k) const { return breakpoints_[static_cast<std::size_t>(k)]; }
  double right(std::int64_t k) const { return breakpoints_[static_cast<std::size_t>(k) + 1]; }
  double width(std::int64_t k) const { return right(k) - left(k); }
  std::span<const double> breakpoints() const { return breakpoints_; }

  /// 0-based index of the interval containing t, or -1 when t <= 0 or t > T.
  std::int64_t interval_of(double t) const {
    if (!(t > 0.0) || t > horizon()) return -1;
    const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), t);
    return static_cast<std::int64_t>(it - breakpoints_.begin()) - 1;
  }

 private:
  std::vector<double> breakpoints_;
};

/// Per-interval infection counts Y = (I_1, ..., I_K).
struct IncidenceCounts {
  std::vector<std::int64_t> counts;

  std::int64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  }

  void validate(const ObservationGrid& grid) const {
    if (static_cast<std::int64_t>(counts.size()) != grid.num_intervals())
      throw std::invalid_argument("IncidenceCounts: length must equal the grid's K");
    for (auto c : counts)
      if (c < 0) throw std::invalid_argument("IncidenceCounts: counts must be non-negative");
  }
};

/// Latent data Z: exact infection/removal times of every individual that is
/// ever infectious. The first i0 entries are the initially infectious
/// (infection_time 0, interval -1); never-infected susceptibles are implicit,
/// carrying (inf, inf) by convention. removal_time is inf when the individual
/// is not removed by the horizon.
struct LatentPath {
  std::int64_t s0 = 0;
  std::int64_t i0 = 0;
  double horizon = 0.0;
  std::vector<double> infection_time;
  std::vector<double> removal_time;
  std::vector<std::int32_t> interval;  // observation interval of the infection; -1 for initials

  std::int64_t population() const { return s0 + i0; }
  std::int64_t size() const { return static_cast<std::int64_t>(infection_time.size()); }
  /// Number of infections in (0, T], i.e. n_I.
  std::int64_t n_infected() const { return size() - i0; }
};

inline void validate_path(const LatentPath& path) {
  if (path.s0 < 0 || path.i0 < 0 || !(path.horizon > 0.0))
    throw std::invalid_argument("LatentPath: s0, i0 >= 0 and horizon > 0 required");
  if (path.size() < path.i0 || path.n_infected() > path.s0)
    throw std::invalid_argument("LatentPath: infected count out of range");
  if (path.removal_time.size() != path.infection_time.size() ||
      path.interval.size() != path.infection_time.size())
    throw std::invalid_argument("LatentPath: ragged coordinate arrays");
  for (std::int64_t j = 0; j < path.size(); ++j) {
    const double zi = path.infection_time[static_cast<std::size_t>(j)];
    const double zr = path.removal_time[static_cast<std::size_t>(j)];
    const bool initial = j < path.i0;
    if (initial) {
      if (zi != 0.0) throw std::invalid_argument("LatentPath: initial infectives must have infection_time 0");
    } else {
      if (!(zi > 0.0) || zi > path.horizon)
        throw std::invalid_argument("LatentPath: infection times must lie in (0, T]");
    }
    if (std::isfinite(zr) && !(zr > zi))
      throw std::invalid_argument("LatentPath: removal_time must exceed infection_time");
  }
}

/// Sufficient statistics of the complete data: infection/removal tallies in
/// (0, T], the exact integral of S(t)I(t), and the powered-duration sum
/// driving the lambda conditional (removed and right-censored terms).
struct SufficientStats {
  std::int64_t n_infections = 0;
  std::int64_t n_removals = 0;
  double integral_si = 0.0;
  double sum_powered_durations = 0.0;
};

/// Step-function compartment counts; value on [times[m], times[m+1]).
struct Trajectory {
  std::vector<double> times;
  std::vector<std::int64_t> s;
  std::vector<std::int64_t> i;
  std::vector<std::int64_t> r;

  std::int64_t s_at(double t) const { return s[segment(t)]; }
  std::int64_t i_at(double t) const { return i[segment(t)]; }
  std::int64_t r_at(double t) const { return r[segment(t)]; }

 private:
  std::size_t segment(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<std::size_t>(it - times.begin()) - 1;
  }
};

namespace detail {

// x^a with fast paths for the common shapes.
inline double pow_shape(double x, double a) {
  if (a == 1.0) return x;
  if (a == 2.0) return x * x;
  return std::pow(x, a);
}

struct Event {
  double time;
  std::int8_t kind;  // 0 removal, 1 infection; removals first at ties
};

inline void collect_events(const LatentPath& path, std::vector<Event>& events) {
  events.clear();
  events.reserve(static_cast<std::size_t>(2 * path.size()));
  for (std::int64_t j = 0; j < path.size(); ++j) {
    const double zi = path.infection_time[static_cast<std::size_t>(j)];
    const double zr = path.removal_time[static_cast<std::size_t>(j)];
    if (j >= path.i0) events.push_back({zi, 1});
    if (zr <= path.horizon) events.push_back({zr, 0});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.time < b.time || (a.time == b.time && a.kind < b.kind);
  });
}

}  // namespace detail

/// Everything the likelihood and the Gibbs conditionals need from a path.
/// `impossible` marks an infection occurring while I = 0; such paths carry
/// zero likelihood.
struct PathSummary {
  SufficientStats stats;
  double sum_log_durations = 0.0;        // sum over removed of log(z^R - z^I)
  double sum_log_i_at_infection = 0.0;   // sum over infections of log I(t^-)
  bool impossible = false;
};

inline PathSummary summarize_path(const LatentPath& path, double shape_a) {
  PathSummary out;
  std::vector<detail::Event> events;
  detail::collect_events(path, events);

  std::int64_t s = path.s0;
  std::int64_t i = path.i0;
  double t_prev = 0.0;
  double integral = 0.0;
  for (const auto& ev : events) {
    integral += static_cast<double>(s) * static_cast<double>(i) * (ev.time - t_prev);
    t_prev = ev.time;
    if (ev.kind == 0) {
      --i;
    } else {
      if (i <= 0) {
        out.impossible = true;
      } else {
        out.sum_log_i_at_infection += std::log(static_cast<double>(i));
      }
      --s;
      ++i;
    }
  }
  integral += static_cast<double>(s) * static_cast<double>(i) * (path.horizon - t_prev);

  out.stats.n_infections = path.n_infected();
  out.stats.integral_si = integral;
  for (std::int64_t j = 0; j < path.size(); ++j) {
    const double zi = path.infection_time[static_cast<std::size_t>(j)];
    const double zr = path.removal_time[static_cast<std::size_t>(j)];
    if (zr <= path.horizon) {
      ++out.stats.n_removals;
      const double d = zr - zi;
      out.stats.sum_powered_durations += detail::pow_shape(d, shape_a);
      out.sum_log_durations += std::log(d);
    } else {
      out.stats.sum_powered_durations += detail::pow_shape(path.horizon - zi, shape_a);
    }
  }
  return out;
}

/// S/I/R step functions of a valid path. Removals are applied before
/// infections at tied timestamps.
inline Trajectory compartment_trajectory(const LatentPath& path) {
  std::vector<detail::Event> events;
  detail::collect_events(path, events);
  Trajectory tr;
  tr.times.reserve(events.size() + 1);
  tr.s.reserve(events.size() + 1);
  tr.i.reserve(events.size() + 1);
  tr.r.reserve(events.size() + 1);
  std::int64_t s = path.s0, i = path.i0, r = 0;
  tr.times.push_back(0.0);
  tr.s.push_back(s);
  tr.i.push_back(i);
  tr.r.push_back(r);
  for (const auto& ev : events) {
    if (ev.kind == 0) {
      --i;
      ++r;
    } else {
      --s;
      ++i;
    }
    if (ev.time == tr.times.back()) {
      tr.s.back() = s;
      tr.i.back() = i;
      tr.r.back() = r;
    } else {
      tr.times.push_back(ev.time);
      tr.s.push_back(s);
      tr.i.push_back(i);
      tr.r.push_back(r);
    }
  }
  return tr;
}

inline SufficientStats sufficient_stats(const LatentPath& path, const ObservationGrid& grid,
                                        double shape_a) {
  if (grid.horizon() != path.horizon)
    throw std::invalid_argument("sufficient_stats: grid horizon must match the path horizon");
  return summarize_path(path, shape_a).stats;
}

/// Complete-data log likelihood assembled from a path summary. -inf encodes
/// a zero-likelihood path (infection while I = 0), not an error.
inline double loglik_from_summary(const PathSummary& sm, const Params& p) {
  if (sm.impossible) return kNegInf;
  const double n_i = static_cast<double>(sm.stats.n_infections);
  const double n_r = static_cast<double>(sm.stats.n_removals);
  return n_i * std::log(p.beta) + sm.sum_log_i_at_infection - p.beta * sm.stats.integral_si +
         n_r * std::log(p.lambda * p.shape_a) + (p.shape_a - 1.0) * sm.sum_log_durations -
         p.lambda * sm.stats.sum_powered_durations;
}

inline double sir_loglik(const LatentPath& path, const Params& params,
                         const ObservationGrid& grid) {
  params.validate();
  if (grid.horizon() != path.horizon)
    throw std::invalid_argument("sir_loglik: grid horizon must match the path horizon");
  return loglik_from_summary(summarize_path(path, params.shape_a), params);
}

/// Bins infection times into the grid's half-open intervals (t_{k-1}, t_k].
/// Initially infectious individuals (infection time 0) are never counted.
inline IncidenceCounts bin_infections(const LatentPath& path, const ObservationGrid& grid) {
  IncidenceCounts y;
  y.counts.assign(static_cast<std::size_t>(grid.num_intervals()), 0);
  for (std::int64_t j = path.i0; j < path.size(); ++j) {
    const std::int64_t k = grid.interval_of(path.infection_time[static_cast<std::size_t>(j)]);
    if (k < 0)
      throw std::invalid_argument("bin_infections: infection time outside (0, T]");
    ++y.counts[static_cast<std::size_t>(k)];
  }
  return y;
}

/// Expected infectious period lambda^{-1/a} Gamma(1 + 1/a).
inline double mean_infectious_period(const Params& p) {
  return std::pow(p.lambda, -1.0 / p.shape_a) * std::tgamma(1.0 + 1.0 / p.shape_a);
}

/// Basic reproduction number beta * s0 * mean infectious period.
inline double r0(const Params& p, std::int64_t s0) {
  return p.beta * static_cast<double>(s0) * mean_infectious_period(p);
}

}  // namespace pdsir
