#pragma once

// Regularized incomplete gamma and normal tail probabilities.
//
// Every routine returns a complementary pair in which the smaller member is
// computed directly and the larger one as its complement, so that
// lower + upper == 1 holds exactly in floating point.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "renewal_count/error.hpp"

namespace renewal_count::special {

struct TailPair {
  double lower;  // P(a, x) or Phi(z)
  double upper;  // Q(a, x) or 1 - Phi(z)
};

namespace detail {

inline constexpr double kIncGammaTol = 1e-15;

/// lgamma(a) - [(a - 1/2) ln a - a + ln(2 pi) / 2], valid for a >= 10.
inline double stirling_error(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12.0 -
              r2 * (1.0 / 360.0 -
                    r2 * (1.0 / 1260.0 -
                          r2 * (1.0 / 1680.0 -
                                r2 * (1.0 / 1188.0 - r2 * (691.0 / 360360.0 - r2 * (1.0 / 156.0 - r2 * 3617.0 / 122400.0)))))));
}

/// ln(x^a e^{-x} / Gamma(a)). The large-a branch keeps the a ln(x/a) and
/// x - a terms together so they cancel without losing digits.
inline double log_gamma_prefactor(double a, double x) {
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double d = (x - a) / a;
  const double log_ratio = std::abs(d) < 0.5 ? std::log1p(d) : std::log(x / a);
  return a * (log_ratio - d) + 0.5 * std::log(a / (2.0 * std::numbers::pi)) -
         stirling_error(a);
}

inline int iteration_cap(double a) {
  return 200 + static_cast<int>(50.0 * std::sqrt(a));
}

/// P(a, x) by the power series; use for x < a + 1.
inline double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  const int cap = iteration_cap(a);
  for (int n = 1; n < cap; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kIncGammaTol) {
      return std::exp(log_gamma_prefactor(a, x)) * sum;
    }
  }
  throw NumericalError("incomplete gamma series did not converge");
}

/// Q(a, x) by the modified Lentz continued fraction; use for x >= a + 1.
inline double upper_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  const int cap = iteration_cap(a);
  for (int i = 1; i < cap; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kIncGammaTol) {
      return std::exp(log_gamma_prefactor(a, x)) * h;
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
inline TailPair incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("incomplete gamma: shape must be positive");
  if (std::isnan(x) || x < 0.0) throw DomainError("incomplete gamma: argument must be non-negative");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (x < a + 1.0) {
    const double p = std::min(1.0, detail::lower_series(a, x));
    return {p, 1.0 - p};
  }
  const double q = std::min(1.0, detail::upper_continued_fraction(a, x));
  return {1.0 - q, q};
}

inline double gamma_p(double a, double x) { return incomplete_gamma(a, x).lower; }
inline double gamma_q(double a, double x) { return incomplete_gamma(a, x).upper; }

/// Standard normal distribution function and its complement.
inline TailPair normal_tails(double z) {
  if (z > 0.0) {
    const double upper = 0.5 * std::erfc(z / std::numbers::sqrt2);
    return {1.0 - upper, upper};
  }
  const double lower = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return {lower, 1.0 - lower};
}

}  // namespace renewal_count::special
