#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pdsir/forward_sim.hpp"
#include "pdsir/mcmc.hpp"
#include "pdsir/model.hpp"

namespace pdsir {

namespace detail {

// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * 3.141592653589793238463 / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

// Autocovariances gamma_0..gamma_{n-1} (biased, denominator n) via FFT.
inline std::vector<double> autocovariances(std::span<const double> series) {
  const std::size_t n = series.size();
  double mean = 0.0;
  for (const double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<std::complex<double>> buf(m, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) buf[i] = series[i] - mean;
  fft(buf, false);
  for (auto& x : buf) x = x * std::conj(x);
  fft(buf, true);
  std::vector<double> gamma(n);
  for (std::size_t k = 0; k < n; ++k) gamma[k] = buf[k].real() / static_cast<double>(n);
  return gamma;
}

}  // namespace detail

/// Effective sample size via Geyer's initial monotone positive sequence of
/// paired autocorrelations. Deterministic, no tuning. A constant series has
/// ESS defined as 1; the estimate is clamped to [1, n].
inline double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 values");
  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  if (*mn == *mx) return 1.0;  // constant series
  const auto gamma = detail::autocovariances(series);
  if (!(gamma[0] > 0.0)) return 1.0;

  double tau = 0.0;
  double prev_pair = kInf;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = gamma[2 * m] / gamma[0];
    if (2 * m + 1 < n) pair += gamma[2 * m + 1] / gamma[0];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);  // enforce monotone decrease
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau -= 1.0;  // the m = 0 pair double-counts rho_0 = 1
  tau = std::max(tau, 1.0);
  const double out = static_cast<double>(n) / tau;
  return std::clamp(out, 1.0, static_cast<double>(n));
}

/// Empirical equal-tailed interval from the (1-mass)/2 and 1-(1-mass)/2
/// quantiles, with the linear-interpolation (type 7) convention.
inline std::pair<double, double> equal_tailed_ci(std::span<const double> series, double mass) {
  if (!(mass > 0.0) || !(mass < 1.0))
    throw std::invalid_argument("equal_tailed_ci: mass must lie in (0, 1)");
  if (series.empty()) throw std::invalid_argument("equal_tailed_ci: empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  const double tail = (1.0 - mass) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;
  double ess_per_sec = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

struct PosteriorSummary {
  ParamSummary beta;
  ParamSummary lambda;
  ParamSummary r0;
  double acceptance_rate = 0.0;
  std::int64_t draws_used = 0;
  std::int64_t burn_in_draws = 0;
  double ci_mass = 0.9;
};

namespace detail {
inline ParamSummary summarize_series(std::span<const double> series, double mass,
                                     double wall_seconds) {
  ParamSummary s;
  const auto n = static_cast<double>(series.size());
  for (const double x : series) s.mean += x;
  s.mean /= n;
  for (const double x : series) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = n > 1 ? std::sqrt(s.sd / (n - 1.0)) : 0.0;
  s.ess = ess(series);
  s.ess_per_sec = wall_seconds > 0.0 ? s.ess / wall_seconds : 0.0;
  const auto [lo, hi] = equal_tailed_ci(series, mass);
  s.ci_lower = lo;
  s.ci_upper = hi;
  return s;
}
}  // namespace detail

/// Posterior summaries of the thinned draws after discarding the first
/// `burn_in_draws` of them (the engine itself never discards anything).
inline PosteriorSummary summarize_chain(const ChainOutput& chain, std::int64_t burn_in_draws,
                                        double ci_mass = 0.9) {
  if (burn_in_draws < 0 || burn_in_draws >= chain.num_draws())
    throw std::invalid_argument("summarize_chain: burn-in must leave at least one draw");
  const auto offset = static_cast<std::size_t>(burn_in_draws);
  const std::size_t kept = static_cast<std::size_t>(chain.num_draws()) - offset;
  PosteriorSummary out;
  out.beta = detail::summarize_series({chain.beta.data() + offset, kept}, ci_mass,
                                      chain.wall_seconds);
  out.lambda = detail::summarize_series({chain.lambda.data() + offset, kept}, ci_mass,
                                        chain.wall_seconds);
  out.r0 = detail::summarize_series({chain.r0.data() + offset, kept}, ci_mass,
                                    chain.wall_seconds);
  out.acceptance_rate = chain.acceptance_rate();
  out.draws_used = static_cast<std::int64_t>(kept);
  out.burn_in_draws = burn_in_draws;
  out.ci_mass = ci_mass;
  return out;
}

// ---------------------------------------------------------------------------
// Experiment harnesses
// ---------------------------------------------------------------------------

struct CoverageConfig {
  std::int64_t replications = 100;
  std::int64_t min_final_size = 20;
  double burn_fraction = 0.2;
  double ci_mass = 0.9;
  int workers = 0;  // 0 = hardware concurrency
};

struct CoverageReplicate {
  std::int64_t n_infections = 0;
  std::int64_t sim_attempts = 0;
  PosteriorSummary summary;
  bool covered_beta = false;
  bool covered_lambda = false;
  bool covered_r0 = false;
};

struct CoverageResult {
  double coverage_beta = 0.0;
  double coverage_lambda = 0.0;
  double coverage_r0 = 0.0;
  double mc_se = 0.0;  // binomial standard error at the observed rates' scale
  double mean_posterior_mean_beta = 0.0;
  double mean_posterior_mean_lambda = 0.0;
  double mean_posterior_mean_r0 = 0.0;
  std::int64_t total_sim_attempts = 0;
  std::vector<CoverageReplicate> replicates;
};

/// Frequentist coverage of equal-tailed BCIs over independent
/// simulate-then-fit replicates; parallel across replicates with
/// deterministic per-replicate seed streams.
inline CoverageResult coverage_experiment(const Params& truth, const SimConfig& sim_base,
                                          const ObservationGrid& grid,
                                          const McmcConfig& mcmc_base,
                                          const CoverageConfig& cfg) {
  if (cfg.replications < 1)
    throw std::invalid_argument("coverage_experiment: replications >= 1 required");
  const double true_r0 = r0(truth, sim_base.s0);

  CoverageResult result;
  result.replicates.resize(static_cast<std::size_t>(cfg.replications));

  std::atomic<std::int64_t> next{0};
  const int workers = cfg.workers > 0
                          ? cfg.workers
                          : std::max(1u, std::thread::hardware_concurrency());
  auto run_replicate = [&](std::int64_t r) {
    SimConfig sim = sim_base;
    sim.params = truth;
    Rng sim_rng(derive_seed(sim_base.seed, 0x5151 + static_cast<std::uint64_t>(r)));
    auto data = simulate_dataset_conditional(sim, grid, cfg.min_final_size, sim_rng);

    McmcConfig mc = mcmc_base;
    mc.seed = derive_seed(mcmc_base.seed, static_cast<std::uint64_t>(r));
    ChainOutput chain = run_chain(data.counts, grid, sim.s0, sim.i0, mc);
    const auto burn = static_cast<std::int64_t>(
        cfg.burn_fraction * static_cast<double>(chain.num_draws()));
    PosteriorSummary sum = summarize_chain(chain, burn, cfg.ci_mass);

    CoverageReplicate& rep = result.replicates[static_cast<std::size_t>(r)];
    rep.n_infections = data.path.n_infected();
    rep.sim_attempts = data.attempts;
    rep.covered_beta = sum.beta.ci_lower <= truth.beta && truth.beta <= sum.beta.ci_upper;
    rep.covered_lambda =
        sum.lambda.ci_lower <= truth.lambda && truth.lambda <= sum.lambda.ci_upper;
    rep.covered_r0 = sum.r0.ci_lower <= true_r0 && true_r0 <= sum.r0.ci_upper;
    rep.summary = std::move(sum);
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t r = next.fetch_add(1);
        if (r >= cfg.replications) return;
        run_replicate(r);
      }
    });
  for (auto& t : pool) t.join();

  const auto n = static_cast<double>(cfg.replications);
  for (const auto& rep : result.replicates) {
    result.coverage_beta += rep.covered_beta ? 1.0 : 0.0;
    result.coverage_lambda += rep.covered_lambda ? 1.0 : 0.0;
    result.coverage_r0 += rep.covered_r0 ? 1.0 : 0.0;
    result.mean_posterior_mean_beta += rep.summary.beta.mean;
    result.mean_posterior_mean_lambda += rep.summary.lambda.mean;
    result.mean_posterior_mean_r0 += rep.summary.r0.mean;
    result.total_sim_attempts += rep.sim_attempts;
  }
  result.coverage_beta /= n;
  result.coverage_lambda /= n;
  result.coverage_r0 /= n;
  result.mean_posterior_mean_beta /= n;
  result.mean_posterior_mean_lambda /= n;
  result.mean_posterior_mean_r0 /= n;
  result.mc_se = std::sqrt(0.9 * 0.1 / n);
  return result;
}

struct RhoSweepScenario {
  SimConfig sim;
  std::int64_t k_intervals = 10;
  std::int64_t min_final_size = 20;
};

struct RhoSweepRow {
  std::int64_t s0 = 0;
  std::int64_t n_infections = 0;
  double rho = 0.0;
  double runtime_seconds = 0.0;
  double acceptance_rate = 0.0;
  double ess_per_sec_beta = 0.0;
  double ess_per_sec_lambda = 0.0;
  double ess_per_sec_r0 = 0.0;
};

/// Grid run over scenarios x rho values; each chain fits the same dataset of
/// its scenario. Rows are produced sequentially so the timings are clean.
inline std::vector<RhoSweepRow> rho_sweep(std::span<const RhoSweepScenario> scenarios,
                                          std::span<const double> rho_values,
                                          const McmcConfig& mcmc_base,
                                          double burn_fraction = 0.2) {
  std::vector<RhoSweepRow> rows;
  for (const auto& sc : scenarios) {
    const ObservationGrid grid = ObservationGrid::regular(sc.sim.horizon, sc.k_intervals);
    Rng sim_rng(sc.sim.seed);
    auto data = simulate_dataset_conditional(sc.sim, grid, sc.min_final_size, sim_rng);
    for (const double rho : rho_values) {
      McmcConfig mc = mcmc_base;
      mc.rho = rho;
      mc.seed = derive_seed(mcmc_base.seed,
                            splitmix64(static_cast<std::uint64_t>(sc.sim.s0)) ^
                                static_cast<std::uint64_t>(rho * 1e6));
      ChainOutput chain = run_chain(data.counts, grid, sc.sim.s0, sc.sim.i0, mc);
      const auto burn = static_cast<std::int64_t>(
          burn_fraction * static_cast<double>(chain.num_draws()));
      PosteriorSummary sum = summarize_chain(chain, burn);
      rows.push_back({sc.sim.s0, data.path.n_infected(), rho, chain.wall_seconds,
                      chain.acceptance_rate(), sum.beta.ess_per_sec, sum.lambda.ess_per_sec,
                      sum.r0.ess_per_sec});
    }
  }
  return rows;
}

}  // namespace pdsir
