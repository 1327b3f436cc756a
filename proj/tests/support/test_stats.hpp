#pragma once

// Test-only statistical machinery: incomplete-gamma CDFs, Kolmogorov-Smirnov
// tests and a Halton sequence. These live outside the library on purpose so
// the oracles stay independent of the code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace testsupport {

// Regularized lower incomplete gamma P(a, x) (series / continued fraction).
inline double reg_lower_gamma(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("reg_lower_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // series expansion
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_prefix);
  }
  // continued fraction for Q(a, x) by modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

inline double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(shape, rate * x);
}

// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
inline double kolmogorov_pvalue(double d, double n) {
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double pvalue = 0.0;
};

inline KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return {d, kolmogorov_pvalue(d, n)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib])
      ++ia;
    else
      ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return {d, kolmogorov_pvalue(d, na * nb / (na + nb))};
}

// CDF of the j-th order statistic (1-based) of n i.i.d. draws with CDF value f.
inline double order_statistic_cdf(double f, int j, int n) {
  double sum = 0.0;
  for (int m = j; m <= n; ++m) {
    double logc = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
    sum += std::exp(logc + m * std::log(f) + (n - m) * std::log1p(-f));
  }
  return std::clamp(sum, 0.0, 1.0);
}

// Halton low-discrepancy sequence (index starts at 1), optionally rotated
// modulo 1 for randomized-QMC error estimates.
class Halton {
 public:
  explicit Halton(std::size_t dim) : dim_(dim) {
    static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                     41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
    if (dim > sizeof(primes) / sizeof(primes[0]))
      throw std::invalid_argument("Halton: dimension too large");
    for (std::size_t d = 0; d < dim; ++d) bases_.push_back(primes[d]);
  }

  std::vector<double> point(std::uint64_t index) const {
    std::vector<double> x(dim_);
    for (std::size_t d = 0; d < dim_; ++d) x[d] = radical_inverse(index, bases_[d]);
    return x;
  }

 private:
  static double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double value = 0.0;
    while (i > 0) {
      value += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
      i /= static_cast<std::uint64_t>(base);
      f *= inv;
    }
    return value;
  }

  std::size_t dim_;
  std::vector<int> bases_;
};

inline double logsumexp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (const double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

}  // namespace testsupport
