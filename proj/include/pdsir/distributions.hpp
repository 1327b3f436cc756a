#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdsir/rng.hpp"

namespace pdsir {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this value of rate*(upper-lower) the truncated exponential is
// evaluated in its uniform limit, avoiding cancellation in
// exp(-mu l) - exp(-mu u). rate == 0 lands here by construction.
inline constexpr double kUniformLimit = 1e-10;

struct TruncExpParams {
  double rate = 0.0;  // >= 0; 0 means the uniform limit
  double lower = 0.0;
  double upper = 1.0;
};

struct TruncWeibullParams {
  double lambda = 1.0;  // scale in F(x) = 1 - exp(-lambda x^a)
  double shape = 1.0;
  double lower = 0.0;
  double upper = 1.0;
};

namespace detail {
inline double clamp_open(double x, double lower, double upper) {
  if (x <= lower) return std::nextafter(lower, upper);
  if (x >= upper) return std::nextafter(upper, lower);
  return x;
}
}  // namespace detail

/// Inverse-CDF draw from TrunExp(rate; lower, upper), strictly inside (lower, upper).
inline double sample_trunc_exp(const TruncExpParams& p, Rng& rng) {
  const double width = p.upper - p.lower;
  const double u = rng.uniform01();
  if (p.rate * width < kUniformLimit)
    return detail::clamp_open(p.lower + u * width, p.lower, p.upper);
  const double mass = -std::expm1(-p.rate * width);  // 1 - e^{-rate*width}
  const double x = p.lower - std::log1p(-u * mass) / p.rate;
  return detail::clamp_open(x, p.lower, p.upper);
}

/// Log density of TrunExp(rate; lower, upper); -inf outside the open support.
inline double trunc_exp_logpdf(double x, const TruncExpParams& p) {
  if (!(x > p.lower && x < p.upper)) return kNegInf;
  const double width = p.upper - p.lower;
  if (p.rate * width < kUniformLimit) return -std::log(width);
  return std::log(p.rate) - p.rate * (x - p.lower) -
         std::log(-std::expm1(-p.rate * width));
}

/// CDF of TrunExp(rate; lower, upper).
inline double trunc_exp_cdf(double x, const TruncExpParams& p) {
  if (x <= p.lower) return 0.0;
  if (x >= p.upper) return 1.0;
  const double width = p.upper - p.lower;
  if (p.rate * width < kUniformLimit) return (x - p.lower) / width;
  return std::expm1(-p.rate * (x - p.lower)) / std::expm1(-p.rate * width);
}

/// Inverse-CDF draw from a Weibull(lambda, a) truncated to (lower, upper).
/// Works in the x^a coordinate, where the distribution is truncated
/// exponential with rate lambda; algebraically identical to computing
/// (-log(A - B u)/lambda)^{1/a} with A = e^{-lambda l^a}, B = A - e^{-lambda u^a}.
inline double sample_trunc_weibull(const TruncWeibullParams& p, Rng& rng) {
  const double la = std::pow(p.lower, p.shape);
  const double ua = std::pow(p.upper, p.shape);
  const double d = ua - la;
  const double u = rng.uniform01();
  double xa;
  if (p.lambda * d < kUniformLimit) {
    xa = la + u * d;
  } else {
    const double mass = -std::expm1(-p.lambda * d);
    xa = la - std::log1p(-u * mass) / p.lambda;
  }
  return detail::clamp_open(std::pow(xa, 1.0 / p.shape), p.lower, p.upper);
}

inline double trunc_weibull_cdf(double x, const TruncWeibullParams& p) {
  if (x <= p.lower) return 0.0;
  if (x >= p.upper) return 1.0;
  const double la = std::pow(p.lower, p.shape);
  const double xa = std::pow(x, p.shape);
  const double ua = std::pow(p.upper, p.shape);
  if (p.lambda * (ua - la) < kUniformLimit) return (xa - la) / (ua - la);
  return std::expm1(-p.lambda * (xa - la)) / std::expm1(-p.lambda * (ua - la));
}

/// log f(x) for the Weibull with F(x) = 1 - exp(-lambda x^a); -inf for x < 0.
inline double weibull_logpdf(double x, double lambda, double a) {
  if (x < 0.0) return kNegInf;
  return std::log(lambda * a) + (a - 1.0) * std::log(x) - lambda * std::pow(x, a);
}

/// log survival: log P(X > x) = -lambda x^a; -inf for x < 0 (out of domain).
inline double weibull_logsurvival(double x, double lambda, double a) {
  if (x < 0.0) return kNegInf;
  return -lambda * std::pow(x, a);
}

inline double weibull_cdf(double x, double lambda, double a) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-lambda * std::pow(x, a));
}

/// Gamma log density, shape-rate parameterization.
inline double gamma_logpdf(double x, double shape, double rate) {
  if (x < 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

inline double sample_gamma(double shape, double rate, Rng& rng) {
  return rng.gamma(shape, rate);
}

}  // namespace pdsir
