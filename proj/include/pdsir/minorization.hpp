#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "pdsir/distributions.hpp"
#include "pdsir/model.hpp"

namespace pdsir {

// Executable lower bounds behind the uniform-ergodicity construction: gamma
// density infima over boxed shape/rate perturbations, and the functions k_r
// and k_theta minorizing the proposal-to-likelihood ratio and the parameter
// full conditional. Everything is computed and returned in log space.

/// Perturbation box around a base gamma density: shape in [a, a+A],
/// rate in [b, b+B].
struct GammaBox {
  double a = 1.0;
  double b = 1.0;
  double A = 0.0;
  double B = 0.0;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || A < 0.0 || B < 0.0)
      throw std::invalid_argument("GammaBox: a, b > 0 and A, B >= 0 required");
  }
};

/// log inf_{0 <= beta <= B} Ga(x; a, b + beta): the infimum switches from the
/// base rate to the capped rate at x* = (a/B) log(1 + B/b).
inline double gamma_inf_rate(double x, double a, double b, double B) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_inf_rate: x must be positive");
  if (B <= 0.0) return gamma_logpdf(x, a, b);
  const double x_star = a / B * std::log1p(B / b);
  return x < x_star ? gamma_logpdf(x, a, b) : gamma_logpdf(x, a, b + B);
}

/// log inf_{0 <= alpha <= A} Ga(x; a + alpha, b): switches from the capped
/// shape to the base shape at x* = (1/b) [Gamma(a+A)/Gamma(a)]^{1/A}.
inline double gamma_inf_shape(double x, double a, double b, double A) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_inf_shape: x must be positive");
  if (A <= 0.0) return gamma_logpdf(x, a, b);
  const double x_star = std::exp((std::lgamma(a + A) - std::lgamma(a)) / A) / b;
  return x <= x_star ? gamma_logpdf(x, a + A, b) : gamma_logpdf(x, a, b);
}

/// log inf over the whole box. The log density is concave in the shape for a
/// fixed rate and in the rate for a fixed shape, so the box infimum sits at a
/// corner. The reduction to the two corners (A, 0) / (0, B) breaks down for
/// shape caps A < 1 with a small rate cap, where the base corner (0, 0) is
/// the minimizer; take the minimum over all four corners.
inline double gamma_inf_joint(double x, const GammaBox& box) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_inf_joint: x must be positive");
  box.validate();
  return std::min(std::min(gamma_logpdf(x, box.a + box.A, box.b),
                           gamma_logpdf(x, box.a, box.b + box.B)),
                  std::min(gamma_logpdf(x, box.a, box.b),
                           gamma_logpdf(x, box.a + box.A, box.b + box.B)));
}

/// log k_r(theta) = -beta n sum_k I_k (t_k - t_{k-1}) - n_I log n, a lower
/// bound on log q(z|theta) - log L(theta; z) over all z consistent with y.
inline double k_r(const Params& params, const IncidenceCounts& y, const ObservationGrid& grid,
                  std::int64_t n) {
  params.validate();
  y.validate(grid);
  if (n < 1) throw std::invalid_argument("k_r: population size n >= 1 required");
  double weighted = 0.0;
  for (std::int64_t k = 0; k < grid.num_intervals(); ++k)
    weighted += static_cast<double>(y.counts[static_cast<std::size_t>(k)]) * grid.width(k);
  const auto n_i = static_cast<double>(y.total());
  return -params.beta * static_cast<double>(n) * weighted -
         n_i * std::log(static_cast<double>(n));
}

/// log k_theta(theta), a lower bound on log pi(theta | z) for every latent z
/// consistent with y: the product of the gamma infima over the data-dependent
/// ranges of the two full conditionals (n population size, T horizon).
inline double k_theta(const Params& params, const IncidenceCounts& y,
                      const ObservationGrid& grid, const PriorHyper& priors, std::int64_t i0,
                      std::int64_t n) {
  params.validate();
  priors.validate();
  y.validate(grid);
  if (i0 < 1 || n < i0) throw std::invalid_argument("k_theta: need 1 <= i0 <= n");
  const auto n_i = static_cast<double>(y.total());
  const auto n_tot = static_cast<double>(n);
  const double T = grid.horizon();
  const double infected_total = n_i + static_cast<double>(i0);

  // beta | z ~ Ga(a_beta + n_I, b_beta + C) with C in (0, n (n_I + I0) T]
  const double beta_term = gamma_inf_rate(params.beta, priors.a_beta + n_i, priors.b_beta,
                                          n_tot * infected_total * T);
  // lambda | z ~ Ga(a_lambda + n_R, b_lambda + D) with n_R <= n_I + I0 and
  // D in (0, (n_I + I0) T^a]
  const double lambda_term =
      gamma_inf_joint(params.lambda, {priors.a_lambda, priors.b_lambda, infected_total,
                                      infected_total * std::pow(T, params.shape_a)});
  return beta_term + lambda_term;
}

}  // namespace pdsir
