#pragma once

// Richardson extrapolation over grids of N, 2N, 4N (, 8N, 16N) steps.
//
// For a Weibull-like inter-arrival distribution (F(u) ~ (alpha u)^beta near
// zero) the raw error is a h^(beta+1) + b h^2 + higher terms, so the first
// step removes power beta+1, the second power 2, and an optional third step
// power beta+2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/probability_vector.hpp"

namespace renewal_count {

/// (2^delta fine - coarse) / (2^delta - 1): removes an error term c h^delta
/// from two estimates at h (coarse) and h/2 (fine). Written as a correction
/// to `fine` so that equal inputs come back unchanged.
inline double richardson_step(double coarse, double fine, double delta) {
  if (!(delta > 0.0)) throw DomainError("richardson step needs a positive order");
  return fine + (fine - coarse) / std::expm1(delta * std::numbers::ln2);
}

/// Error powers eliminated by the successive extrapolation stages.
struct ExtrapolationScheme {
  double first = 2.0;
  double second = 3.0;
  double third = 4.0;

  /// Powers beta+1, 2 and beta+2 for F(u) ~ c u^beta near zero.
  static ExtrapolationScheme weibull(double beta) {
    if (!(beta > 0.0)) throw ParameterError("extrapolation shape must be positive");
    return {beta + 1.0, 2.0, beta + 2.0};
  }

  /// Fallback when the small-time behaviour is not a power law.
  static ExtrapolationScheme classical() { return {2.0, 3.0, 4.0}; }

  static ExtrapolationScheme for_distribution(const DistributionSpec& spec) {
    if (const auto p = small_time_power(spec)) return weibull(*p);
    return classical();
  }

  /// For a delayed renewal process the rougher of the two distributions
  /// near zero sets the leading error.
  static ExtrapolationScheme for_distributions(const DistributionSpec& first, const DistributionSpec& rest) {
    const auto a = small_time_power(first);
    const auto b = small_time_power(rest);
    if (a && b) return weibull(std::min(*a, *b));
    return classical();
  }

  bool operator==(const ExtrapolationScheme&) const = default;
};

namespace detail {

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("extrapolation inputs differ in length");
}

inline std::vector<double> richardson(std::span<const double> coarse, std::span<const double> fine, double delta) {
  require_same_length(coarse, fine);
  std::vector<double> out(coarse.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = richardson_step(coarse[i], fine[i], delta);
  return out;
}

inline void require_doubling_family(std::span<const ProbabilityVector* const> vs) {
  for (std::size_t i = 1; i < vs.size(); ++i) {
    if (vs[i]->probs.size() != vs[0]->probs.size()) throw ContractError("extrapolation inputs differ in m_max");
    if (vs[i]->horizon != vs[0]->horizon) throw ContractError("extrapolation inputs differ in horizon");
    if (vs[i]->grid_steps != 2 * vs[i - 1]->grid_steps) {
      throw ContractError("extrapolation inputs must be computed on N, 2N, 4N, ... steps");
    }
  }
}

}  // namespace detail

/// Stage-1 values from the N and 2N runs.
inline std::vector<double> one_stage(std::span<const double> a1, std::span<const double> a2,
                                     const ExtrapolationScheme& scheme) {
  return detail::richardson(a1, a2, scheme.first);
}

/// Stage-2 values from the N, 2N, 4N runs.
inline std::vector<double> two_stage(std::span<const double> a1, std::span<const double> a2,
                                     std::span<const double> a3, const ExtrapolationScheme& scheme) {
  const auto b1 = detail::richardson(a1, a2, scheme.first);
  const auto b2 = detail::richardson(a2, a3, scheme.first);
  return detail::richardson(b1, b2, scheme.second);
}

/// Stage-3 values from the N .. 16N runs: the stage-2 scheme on the triples
/// (A2, A3, A4) and (A3, A4, A5), then one more step at the third power.
inline std::vector<double> three_stage(std::span<const std::vector<double>> a, const ExtrapolationScheme& scheme) {
  if (a.size() != 5) throw ContractError("stage-3 extrapolation needs five runs");
  const auto c2 = two_stage(a[1], a[2], a[3], scheme);
  const auto c3 = two_stage(a[2], a[3], a[4], scheme);
  return detail::richardson(c2, c3, scheme.third);
}

/// Two-stage extrapolation of three vectors computed on N, 2N and 4N steps,
/// removing the h^(beta+1) and h^2 error terms.
inline ProbabilityVector weibull_two_stage(const ProbabilityVector& a1, const ProbabilityVector& a2,
                                           const ProbabilityVector& a3, double beta) {
  const ProbabilityVector* vs[] = {&a1, &a2, &a3};
  detail::require_doubling_family(vs);
  ProbabilityVector out;
  out.probs = two_stage(a1.probs, a2.probs, a3.probs, ExtrapolationScheme::weibull(beta));
  out.horizon = a1.horizon;
  out.grid_steps = a1.grid_steps;
  out.stage = Stage::Stage2;
  return out;
}

/// Third stage from five vectors on N .. 16N steps.
inline ProbabilityVector third_stage(std::span<const ProbabilityVector> a, double beta) {
  if (a.size() != 5) throw ContractError("stage-3 extrapolation needs five runs");
  const ProbabilityVector* vs[] = {&a[0], &a[1], &a[2], &a[3], &a[4]};
  detail::require_doubling_family(vs);
  std::vector<std::vector<double>> raw;
  for (const auto& v : a) raw.push_back(v.probs);
  ProbabilityVector out;
  out.probs = three_stage(raw, ExtrapolationScheme::weibull(beta));
  out.horizon = a[0].horizon;
  out.grid_steps = a[0].grid_steps;
  out.stage = Stage::Stage3;
  return out;
}

enum class OrderStatus {
  Estimated,
  Converged,      // successive differences at rounding level
  Indeterminate,  // differences change sign; no power law fits
};

struct OrderEstimate {
  OrderStatus status = OrderStatus::Indeterminate;
  double order = std::numeric_limits<double>::quiet_NaN();

  bool ok() const { return status == OrderStatus::Estimated; }
};

/// Empirical error power from values at N, 2N, 4N steps:
/// ln((S2 - S1) / (S3 - S2)) / ln 2.
inline OrderEstimate estimate_order(double s1, double s2, double s3) {
  const double d21 = s2 - s1;
  const double d32 = s3 - s2;
  if (std::abs(d32) < 1e3 * std::numeric_limits<double>::epsilon() * std::abs(s3)) {
    return {OrderStatus::Converged, std::numeric_limits<double>::quiet_NaN()};
  }
  const double ratio = d21 / d32;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) return {};
  return {OrderStatus::Estimated, std::log2(ratio)};
}

struct AitkenResult {
  double value = 0.0;
  bool degenerate = false;
};

/// Aitken's delta-squared acceleration of S1, in the subtraction form
/// S1 - (S1 - S2)^2 / (S1 + S3 - 2 S2).
inline AitkenResult aitken(double s1, double s2, double s3) {
  const double denom = s1 + s3 - 2.0 * s2;
  if (denom == 0.0 || !std::isfinite(denom)) return {s3, true};
  const double d = s1 - s2;
  const double value = s1 - d * d / denom;
  if (!std::isfinite(value)) return {s3, true};
  return {value, false};
}

/// All intermediate quantities of an N, 2N, 4N extrapolation.
struct ExtrapolationReport {
  std::vector<ProbabilityVector> raw;  // N, 2N, 4N
  ProbabilityVector stage1;            // from N, 2N
  ProbabilityVector stage2;
  std::vector<OrderEstimate> estimated_orders;  // per probability, from the raw triple
  ExtrapolationScheme scheme;
};

inline ExtrapolationReport make_report(std::vector<ProbabilityVector> raw, const ExtrapolationScheme& scheme) {
  if (raw.size() != 3) throw ContractError("extrapolation report needs three runs");
  const ProbabilityVector* vs[] = {&raw[0], &raw[1], &raw[2]};
  detail::require_doubling_family(vs);
  ExtrapolationReport r;
  r.scheme = scheme;
  r.stage1 = {one_stage(raw[0].probs, raw[1].probs, scheme), raw[0].horizon, raw[0].grid_steps, Stage::Stage1};
  r.stage2 = {two_stage(raw[0].probs, raw[1].probs, raw[2].probs, scheme), raw[0].horizon, raw[0].grid_steps,
              Stage::Stage2};
  for (std::size_t i = 0; i < raw[0].probs.size(); ++i) {
    r.estimated_orders.push_back(estimate_order(raw[0].probs[i], raw[1].probs[i], raw[2].probs[i]));
  }
  r.raw = std::move(raw);
  return r;
}

}  // namespace renewal_count
