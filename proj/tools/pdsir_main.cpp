// Command-line front end: simulate | fit | single-site | rho-sweep |
// coverage | verify-bounds. Every run writes a manifest.json holding the
// exact configuration needed to replay it.
//
// Exit codes: 0 success, 1 usage error, 2 data validation error, 3 runtime
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdsir/diagnostics.hpp"
#include "pdsir/forward_sim.hpp"
#include "pdsir/io.hpp"
#include "pdsir/mcmc.hpp"
#include "pdsir/minorization.hpp"
#include "pdsir/model.hpp"
#include "pdsir/proposal.hpp"
#include "pdsir/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

struct FitFlags {
  std::string data;
  std::int64_t s0 = 0;
  std::int64_t i0 = 1;
  double shape = 2.0;
  std::int64_t iters = 100000;
  std::int64_t thin = 10;
  double rho = 0.2;
  std::uint64_t seed = 1;
  std::vector<double> priors{0.01, 1.0, 0.01, 1.0};
  double init_beta = 0.0;  // 0 = derive from the data scale
  double init_lambda = 0.1;
  double burn_frac = 0.05;
  double ci_mass = 0.9;
  std::string out;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_rho) {
  cmd->add_option("--data", f.data, "incidence CSV (interval_end_time,count)")->required();
  cmd->add_option("--s0", f.s0, "initial susceptible count")->required();
  cmd->add_option("--i0", f.i0, "initially infectious count")->required();
  cmd->add_option("--shape", f.shape, "Weibull shape a (known)")->capture_default_str();
  cmd->add_option("--iters", f.iters, "MCMC iterations")->capture_default_str();
  cmd->add_option("--thin", f.thin, "record every thin-th draw")->capture_default_str();
  if (with_rho)
    cmd->add_option("--rho", f.rho, "fraction of infected refreshed per iteration")
        ->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--priors", f.priors,
                  "gamma hyperparameters: a_beta b_beta a_lambda b_lambda")
      ->expected(4);
  cmd->add_option("--init-beta", f.init_beta,
                  "initial beta (default: 1/(s0*horizon), a low-density start)");
  cmd->add_option("--init-lambda", f.init_lambda, "initial lambda")->capture_default_str();
  cmd->add_option("--burn-frac", f.burn_frac, "fraction of draws discarded for the summary")
      ->capture_default_str();
  cmd->add_option("--ci-mass", f.ci_mass, "credible-interval mass")->capture_default_str();
  cmd->add_option("--out", f.out, "output directory")->required();
}

int run_fit(const FitFlags& f, pdsir::SamplerMode mode) {
  Timer timer;
  const auto loaded = pdsir::load_incidence_csv(f.data);

  pdsir::McmcConfig cfg;
  cfg.iterations = f.iters;
  cfg.thin = f.thin;
  cfg.rho = f.rho;
  cfg.seed = f.seed;
  cfg.mode = mode;
  cfg.priors = {f.priors[0], f.priors[1], f.priors[2], f.priors[3]};
  const double init_beta =
      f.init_beta > 0.0 ? f.init_beta
                        : 1.0 / (static_cast<double>(f.s0) * loaded.grid.horizon());
  cfg.init_params = {init_beta, f.init_lambda, f.shape};

  const pdsir::ChainOutput chain =
      pdsir::run_chain(loaded.counts, loaded.grid, f.s0, f.i0, cfg);
  const auto burn =
      static_cast<std::int64_t>(f.burn_frac * static_cast<double>(chain.num_draws()));
  const pdsir::PosteriorSummary summary = pdsir::summarize_chain(chain, burn, f.ci_mass);

  ensure_dir(f.out);
  pdsir::write_samples_csv(f.out + "/samples.csv", chain);
  json sj = pdsir::summary_to_json(summary);
  // derived scale: posterior mean infectious period, lambda^{-1/a} Gamma(1+1/a)
  {
    const std::size_t offset = static_cast<std::size_t>(burn);
    double mip = 0.0;
    for (std::size_t i = offset; i < chain.lambda.size(); ++i)
      mip += pdsir::mean_infectious_period({1.0, chain.lambda[i], f.shape});
    sj["mean_infectious_period"] = mip / static_cast<double>(chain.lambda.size() - offset);
  }
  pdsir::write_json(f.out + "/summary.json", sj);

  pdsir::RunManifest manifest;
  manifest.subcommand = mode == pdsir::SamplerMode::single_site ? "single-site" : "fit";
  manifest.config = {{"data", f.data},
                     {"s0", f.s0},
                     {"i0", f.i0},
                     {"shape", f.shape},
                     {"iters", f.iters},
                     {"thin", f.thin},
                     {"rho", cfg.rho},
                     {"priors", f.priors},
                     {"init_beta", init_beta},
                     {"init_lambda", f.init_lambda},
                     {"burn_frac", f.burn_frac},
                     {"ci_mass", f.ci_mass},
                     {"mode", mode == pdsir::SamplerMode::single_site ? "single_site" : "block"}};
  manifest.seed = f.seed;
  manifest.data_checksum = hex64(pdsir::fnv1a64_file(f.data));
  manifest.wall_seconds = timer.seconds();
  pdsir::write_manifest(f.out + "/manifest.json", manifest);

  std::printf("fit: %lld draws, acceptance %.3f, wall %.1fs -> %s\n",
              static_cast<long long>(chain.num_draws()), chain.acceptance_rate(),
              chain.wall_seconds, f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdsir: exact Bayesian inference for the stochastic SIR model from "
               "incidence counts via a data-augmented MCMC with PD-SIR block proposals"};
  app.set_version_flag("--version", pdsir::kVersion);
  app.require_subcommand(1);

  // ---- simulate -----------------------------------------------------------
  struct {
    std::int64_t s0 = 1000, i0 = 10, k = 10;
    double beta = 0.00225, lambda = 1.0, shape = 2.0, horizon = 6.0;
    std::uint64_t seed = 1;
    std::int64_t min_final_size = 0;
    std::string out, time_unit = "unspecified";
  } sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate an epidemic and bin its incidence");
  c_sim->add_option("--s0", sim.s0)->capture_default_str();
  c_sim->add_option("--i0", sim.i0)->capture_default_str();
  c_sim->add_option("--beta", sim.beta)->capture_default_str();
  c_sim->add_option("--lambda", sim.lambda)->capture_default_str();
  c_sim->add_option("--shape", sim.shape)->capture_default_str();
  c_sim->add_option("--horizon", sim.horizon)->capture_default_str();
  c_sim->add_option("--k", sim.k, "number of observation intervals")->capture_default_str();
  c_sim->add_option("--seed", sim.seed)->capture_default_str();
  c_sim->add_option("--min-final-size", sim.min_final_size,
                    "resample until at least this many infections (0 = keep the first draw)")
      ->capture_default_str();
  c_sim->add_option("--time-unit", sim.time_unit)->capture_default_str();
  c_sim->add_option("--out", sim.out, "output directory")->required();

  // ---- fit / single-site --------------------------------------------------
  FitFlags fit_flags;
  auto* c_fit = app.add_subcommand("fit", "block DA-MCMC fit to an incidence CSV");
  add_fit_flags(c_fit, fit_flags, true);

  FitFlags ss_flags;
  auto* c_ss = app.add_subcommand(
      "single-site", "single-site comparator (one individual refreshed per iteration)");
  add_fit_flags(c_ss, ss_flags, false);

  // ---- rho-sweep ----------------------------------------------------------
  struct {
    std::vector<std::int64_t> s0{250, 500, 1000};
    std::vector<double> r0_targets{2.2, 2.5, 3.0};
    std::vector<double> rhos{0.02, 0.05, 0.1, 0.25, 0.5, 1.0};
    std::int64_t i0 = 10, k = 10, iters = 200000, thin = 10, min_final_size = 100;
    double lambda = 1.0, shape = 2.0, horizon = 6.0;
    std::uint64_t seed = 1;
    std::string out;
  } sweep;
  auto* c_sweep = app.add_subcommand("rho-sweep",
                                     "runtime/acceptance/ESS-per-second over a rho grid");
  c_sweep->add_option("--s0", sweep.s0, "population sizes")->capture_default_str();
  c_sweep->add_option("--r0", sweep.r0_targets, "target R0 per population size")
      ->capture_default_str();
  c_sweep->add_option("--rho", sweep.rhos)->capture_default_str();
  c_sweep->add_option("--i0", sweep.i0)->capture_default_str();
  c_sweep->add_option("--k", sweep.k)->capture_default_str();
  c_sweep->add_option("--iters", sweep.iters)->capture_default_str();
  c_sweep->add_option("--thin", sweep.thin)->capture_default_str();
  c_sweep->add_option("--lambda", sweep.lambda)->capture_default_str();
  c_sweep->add_option("--shape", sweep.shape)->capture_default_str();
  c_sweep->add_option("--horizon", sweep.horizon)->capture_default_str();
  c_sweep->add_option("--min-final-size", sweep.min_final_size)->capture_default_str();
  c_sweep->add_option("--seed", sweep.seed)->capture_default_str();
  c_sweep->add_option("--out", sweep.out, "output CSV file")->required();

  // ---- coverage -----------------------------------------------------------
  struct {
    std::int64_t replications = 200, s0 = 250, i0 = 10, k = 10, iters = 50000, thin = 5;
    std::int64_t min_final_size = 20;
    double beta = 0.011286, lambda = 1.0, shape = 2.0, horizon = 6.0, rho = 0.5;
    double burn_frac = 0.2, ci_mass = 0.9;
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out;
  } cov;
  auto* c_cov = app.add_subcommand("coverage",
                                   "frequentist coverage of the equal-tailed BCIs");
  c_cov->add_option("--replications", cov.replications)->capture_default_str();
  c_cov->add_option("--s0", cov.s0)->capture_default_str();
  c_cov->add_option("--i0", cov.i0)->capture_default_str();
  c_cov->add_option("--beta", cov.beta)->capture_default_str();
  c_cov->add_option("--lambda", cov.lambda)->capture_default_str();
  c_cov->add_option("--shape", cov.shape)->capture_default_str();
  c_cov->add_option("--horizon", cov.horizon)->capture_default_str();
  c_cov->add_option("--k", cov.k)->capture_default_str();
  c_cov->add_option("--iters", cov.iters)->capture_default_str();
  c_cov->add_option("--thin", cov.thin)->capture_default_str();
  c_cov->add_option("--rho", cov.rho)->capture_default_str();
  c_cov->add_option("--min-final-size", cov.min_final_size)->capture_default_str();
  c_cov->add_option("--burn-frac", cov.burn_frac)->capture_default_str();
  c_cov->add_option("--ci-mass", cov.ci_mass)->capture_default_str();
  c_cov->add_option("--workers", cov.workers, "0 = hardware concurrency")
      ->capture_default_str();
  c_cov->add_option("--seed", cov.seed)->capture_default_str();
  c_cov->add_option("--out", cov.out, "output CSV file")->required();

  // ---- verify-bounds ------------------------------------------------------
  struct {
    std::int64_t instances = 1000;
    std::uint64_t seed = 1;
    std::string out;
  } vb;
  auto* c_vb = app.add_subcommand(
      "verify-bounds", "numeric certificate of the minorization inequalities");
  c_vb->add_option("--instances", vb.instances)->capture_default_str();
  c_vb->add_option("--seed", vb.seed)->capture_default_str();
  c_vb->add_option("--out", vb.out, "output CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_sim->parsed()) {
      Timer timer;
      pdsir::SimConfig cfg{sim.s0, sim.i0, {sim.beta, sim.lambda, sim.shape}, sim.horizon,
                           sim.seed};
      const auto grid = pdsir::ObservationGrid::regular(sim.horizon, sim.k);
      pdsir::Rng rng(sim.seed);
      pdsir::LatentPath path;
      pdsir::IncidenceCounts counts;
      std::int64_t attempts = 1;
      if (sim.min_final_size > 0) {
        auto data = pdsir::simulate_dataset_conditional(cfg, grid, sim.min_final_size, rng);
        path = std::move(data.path);
        counts = std::move(data.counts);
        attempts = data.attempts;
      } else {
        auto data = pdsir::simulate_dataset(cfg, grid, rng);
        path = std::move(data.first);
        counts = std::move(data.second);
      }
      ensure_dir(sim.out);
      pdsir::write_incidence_csv(sim.out + "/incidence.csv", grid, counts, sim.time_unit);
      pdsir::write_path_csv(sim.out + "/true_path.csv", path);
      pdsir::RunManifest manifest;
      manifest.subcommand = "simulate";
      manifest.config = {{"s0", sim.s0},           {"i0", sim.i0},
                         {"beta", sim.beta},       {"lambda", sim.lambda},
                         {"shape", sim.shape},     {"horizon", sim.horizon},
                         {"k", sim.k},             {"min_final_size", sim.min_final_size},
                         {"attempts", attempts},   {"time_unit", sim.time_unit}};
      manifest.seed = sim.seed;
      manifest.wall_seconds = timer.seconds();
      pdsir::write_manifest(sim.out + "/manifest.json", manifest);
      std::printf("simulate: %lld infections over %lld intervals -> %s\n",
                  static_cast<long long>(counts.total()), static_cast<long long>(sim.k),
                  sim.out.c_str());
      return 0;
    }

    if (c_fit->parsed()) return run_fit(fit_flags, pdsir::SamplerMode::block);
    if (c_ss->parsed()) return run_fit(ss_flags, pdsir::SamplerMode::single_site);

    if (c_sweep->parsed()) {
      Timer timer;
      if (sweep.s0.size() != sweep.r0_targets.size())
        throw pdsir::DataError("rho-sweep: --s0 and --r0 must have the same length");
      std::vector<pdsir::RhoSweepScenario> scenarios;
      for (std::size_t i = 0; i < sweep.s0.size(); ++i) {
        pdsir::RhoSweepScenario sc;
        sc.sim.s0 = sweep.s0[i];
        sc.sim.i0 = sweep.i0;
        const double mean_period =
            pdsir::mean_infectious_period({1.0, sweep.lambda, sweep.shape});
        sc.sim.params = {sweep.r0_targets[i] /
                             (static_cast<double>(sweep.s0[i]) * mean_period),
                         sweep.lambda, sweep.shape};
        sc.sim.horizon = sweep.horizon;
        sc.sim.seed = pdsir::derive_seed(sweep.seed, 7000 + i);
        sc.k_intervals = sweep.k;
        sc.min_final_size = sweep.min_final_size;
        scenarios.push_back(sc);
      }
      pdsir::McmcConfig base;
      base.iterations = sweep.iters;
      base.thin = sweep.thin;
      base.seed = sweep.seed;
      base.init_params = {1e-4, 0.1, sweep.shape};
      const auto rows = pdsir::rho_sweep(scenarios, sweep.rhos, base);
      std::ofstream out(sweep.out);
      if (!out) throw std::runtime_error("cannot write " + sweep.out);
      out << "s0,n_infections,rho,runtime_seconds,acceptance_rate,ess_per_sec_beta,"
             "ess_per_sec_lambda,ess_per_sec_r0\n";
      for (const auto& r : rows)
        out << r.s0 << "," << r.n_infections << "," << r.rho << "," << r.runtime_seconds
            << "," << r.acceptance_rate << "," << r.ess_per_sec_beta << ","
            << r.ess_per_sec_lambda << "," << r.ess_per_sec_r0 << "\n";
      pdsir::RunManifest manifest;
      manifest.subcommand = "rho-sweep";
      manifest.config = {{"s0", sweep.s0},         {"r0", sweep.r0_targets},
                         {"rho", sweep.rhos},      {"i0", sweep.i0},
                         {"k", sweep.k},           {"iters", sweep.iters},
                         {"thin", sweep.thin},     {"lambda", sweep.lambda},
                         {"shape", sweep.shape},   {"horizon", sweep.horizon},
                         {"min_final_size", sweep.min_final_size}};
      manifest.seed = sweep.seed;
      manifest.wall_seconds = timer.seconds();
      pdsir::write_manifest(sweep.out + ".manifest.json", manifest);
      std::printf("rho-sweep: %zu rows -> %s\n", rows.size(), sweep.out.c_str());
      return 0;
    }

    if (c_cov->parsed()) {
      Timer timer;
      const pdsir::Params truth{cov.beta, cov.lambda, cov.shape};
      pdsir::SimConfig sim_cfg{cov.s0, cov.i0, truth, cov.horizon, cov.seed};
      const auto grid = pdsir::ObservationGrid::regular(cov.horizon, cov.k);
      pdsir::McmcConfig mc;
      mc.iterations = cov.iters;
      mc.thin = cov.thin;
      mc.rho = cov.rho;
      mc.seed = pdsir::derive_seed(cov.seed, 0xC0FFEE);
      mc.init_params = {truth.beta / 10.0, truth.lambda / 10.0, cov.shape};
      pdsir::CoverageConfig cc;
      cc.replications = cov.replications;
      cc.min_final_size = cov.min_final_size;
      cc.burn_fraction = cov.burn_frac;
      cc.ci_mass = cov.ci_mass;
      cc.workers = cov.workers;
      const auto result = pdsir::coverage_experiment(truth, sim_cfg, grid, mc, cc);
      std::ofstream out(cov.out);
      if (!out) throw std::runtime_error("cannot write " + cov.out);
      out << "replicate,n_infections,sim_attempts,covered_beta,covered_lambda,covered_r0,"
             "mean_beta,mean_lambda,mean_r0\n";
      for (std::size_t r = 0; r < result.replicates.size(); ++r) {
        const auto& rep = result.replicates[r];
        out << r << "," << rep.n_infections << "," << rep.sim_attempts << ","
            << rep.covered_beta << "," << rep.covered_lambda << "," << rep.covered_r0 << ","
            << rep.summary.beta.mean << "," << rep.summary.lambda.mean << ","
            << rep.summary.r0.mean << "\n";
      }
      pdsir::RunManifest manifest;
      manifest.subcommand = "coverage";
      manifest.config = {{"replications", cov.replications},
                         {"s0", cov.s0},
                         {"i0", cov.i0},
                         {"beta", cov.beta},
                         {"lambda", cov.lambda},
                         {"shape", cov.shape},
                         {"horizon", cov.horizon},
                         {"k", cov.k},
                         {"iters", cov.iters},
                         {"thin", cov.thin},
                         {"rho", cov.rho},
                         {"min_final_size", cov.min_final_size},
                         {"burn_frac", cov.burn_frac},
                         {"ci_mass", cov.ci_mass}};
      manifest.seed = cov.seed;
      manifest.wall_seconds = timer.seconds();
      pdsir::write_manifest(cov.out + ".manifest.json", manifest);
      std::printf(
          "coverage: beta %.3f lambda %.3f r0 %.3f over %lld replications -> %s\n",
          result.coverage_beta, result.coverage_lambda, result.coverage_r0,
          static_cast<long long>(cov.replications), cov.out.c_str());
      return 0;
    }

    if (c_vb->parsed()) {
      Timer timer;
      pdsir::Rng rng(vb.seed);
      std::ofstream out(vb.out);
      if (!out) throw std::runtime_error("cannot write " + vb.out);
      out << "instance,log_kr,log_q_minus_log_lik,margin_r,log_ktheta,log_pi,margin_theta\n";
      std::int64_t violations = 0;
      for (std::int64_t inst = 0; inst < vb.instances; ++inst) {
        const auto k = 1 + static_cast<std::int64_t>(rng.bounded_int(5));
        const auto grid = pdsir::ObservationGrid::regular(rng.uniform(0.5, 3.0), k);
        pdsir::IncidenceCounts y;
        for (std::int64_t j = 0; j < k; ++j)
          y.counts.push_back(static_cast<std::int64_t>(rng.bounded_int(6)));
        const pdsir::Params theta{rng.uniform(0.02, 1.2), rng.uniform(0.3, 2.0),
                                  rng.uniform(0.5, 3.0)};
        const std::int64_t i0 = 1 + static_cast<std::int64_t>(rng.bounded_int(3));
        const std::int64_t s0 = y.total() + static_cast<std::int64_t>(rng.bounded_int(20));
        const std::int64_t n = s0 + i0;
        const pdsir::PriorHyper priors{0.01, 1.0, 0.01, 1.0};

        const auto prop = pdsir::propose_full(y, grid, theta, i0, s0, rng);
        const double lq = pdsir::proposal_logdensity(prop.path, prop.updated, grid, theta);
        const double ll = pdsir::sir_loglik(prop.path, theta, grid);
        const double log_kr = pdsir::k_r(theta, y, grid, n);
        const double ratio = ll == pdsir::kNegInf ? pdsir::kInf : lq - ll;
        const double margin_r = ratio - log_kr;

        const auto st = pdsir::summarize_path(prop.path, theta.shape_a).stats;
        const double log_pi =
            pdsir::gamma_logpdf(theta.beta,
                                priors.a_beta + static_cast<double>(st.n_infections),
                                priors.b_beta + st.integral_si) +
            pdsir::gamma_logpdf(theta.lambda,
                                priors.a_lambda + static_cast<double>(st.n_removals),
                                priors.b_lambda + st.sum_powered_durations);
        const double log_ktheta = pdsir::k_theta(theta, y, grid, priors, i0, n);
        const double margin_theta = log_pi - log_ktheta;
        if (margin_r < 0.0 || margin_theta < 0.0) ++violations;
        out << inst << "," << log_kr << "," << ratio << "," << margin_r << "," << log_ktheta
            << "," << log_pi << "," << margin_theta << "\n";
      }
      pdsir::RunManifest manifest;
      manifest.subcommand = "verify-bounds";
      manifest.config = {{"instances", vb.instances}};
      manifest.seed = vb.seed;
      manifest.wall_seconds = timer.seconds();
      pdsir::write_manifest(vb.out + ".manifest.json", manifest);
      std::printf("verify-bounds: %lld instances, %lld violations -> %s\n",
                  static_cast<long long>(vb.instances), static_cast<long long>(violations),
                  vb.out.c_str());
      return violations == 0 ? 0 : 3;
    }
  } catch (const pdsir::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
