#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// runner. Each check returns how many cases ran and a description of the
// first failure, if any.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "renewal_count/renewal_count.hpp"

namespace props {

using namespace renewal_count;

struct Outcome {
  int cases = 0;
  int failures = 0;
  std::string first_failure;
  double worst = 0.0;  // largest observed deviation

  bool ok() const { return failures == 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

/// Inter-arrival distribution whose rate parameter times `t` lies in
/// [0.5, max_intensity] (roughly the mean count over [0, t]) and, for the
/// power-law families, with a small-time power in [lo_shape, hi_shape].
inline DistributionSpec random_spec(std::mt19937_64& rng, double lo_shape = 0.6, double hi_shape = 2.0, double t = 1.0,
                                    double max_intensity = 5.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double a, double b) { return a + (b - a) * u(rng); };
  auto rate = [&] { return in(0.5, max_intensity) / t; };
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: return DistributionSpec::exponential(rate());
    case 1: return DistributionSpec::weibull(rate(), in(lo_shape, hi_shape));
    case 2: {
      const double k = in(lo_shape, hi_shape);
      return DistributionSpec::gamma(k, k * rate());
    }
    case 3: {
      // small-time power 1/(q sigma) kept inside the shape range
      const double q = in(0.5, 1.5), power = in(lo_shape, hi_shape);
      return DistributionSpec::gengamma(-std::log(rate()), 1.0 / (q * power), q);
    }
    default: return DistributionSpec::burr(rate(), in(lo_shape, hi_shape), in(0.5, 3.0));
  }
}

inline std::string describe(const DistributionSpec& s) { return to_string(s); }

/// Sum of P_0..P_M plus an independently integrated P(N >= M+1) equals 1.
/// Three-stage values on N = 48: at N = 24 the residual reaches 2e-6 for
/// small-time powers near 0.6 with a mean count near 5.
inline Outcome normalization(int cases, std::uint64_t seed, double tol = 1e-6) {
  std::mt19937_64 rng(seed);
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const auto spec = random_spec(rng);
    const auto m_max = std::uniform_int_distribution<unsigned>(2, 8)(rng);
    const auto pv = compute_probs(spec, 1.0, m_max, {Engine::Direct, Stage::Stage3, 48});
    double total = compute_censored(spec, 1.0, m_max + 1, {Engine::DePril, Stage::Stage3, 48});
    for (double p : pv.probs) total += p;
    const double dev = std::abs(total - 1.0);
    o.worst = std::max(o.worst, dev);
    if (!(dev <= tol)) o.fail(describe(spec) + " M=" + std::to_string(m_max) + " total=" + std::to_string(total));
  }
  return o;
}

/// Delayed process: with M the first count whose tail P(N >= M+1) is below
/// 1e-8, P_0..P_M plus that tail equals 1.
inline Outcome normalization_delayed(int cases, std::uint64_t seed, double tol = 1e-6) {
  std::mt19937_64 rng(seed);
  const ComputeOptions opts{Engine::DePril, Stage::Stage3, 48};
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const ModifiedSpec spec{random_spec(rng), random_spec(rng)};
    unsigned m_max = 4;
    double tail = compute_censored(spec, 1.0, m_max + 1, opts);
    while (tail >= 1e-8 && m_max < 80) tail = compute_censored(spec, 1.0, ++m_max + 1, opts);
    double total = tail;
    for (double p : compute_probs(spec, 1.0, m_max, opts).probs) total += p;
    const double dev = std::abs(total - 1.0);
    o.worst = std::max(o.worst, dev);
    if (!(dev <= tol)) {
      o.fail(describe(spec.first) + " then " + describe(spec.rest) + " M=" + std::to_string(m_max) +
             " total=" + std::to_string(total));
    }
  }
  return o;
}

/// P(N(t) <= m) is non-decreasing in m and non-increasing in t.
inline Outcome count_cdf_monotone(int cases, std::uint64_t seed, double slack = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(0.3, 2.0);
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const auto spec = random_spec(rng);
    double t1 = ut(rng), t2 = ut(rng);
    if (t1 > t2) std::swap(t1, t2);
    const std::size_t m_max = 8;
    const auto a = compute_probs(spec, t1, m_max, {Engine::Direct, Stage::Stage2, 24});
    const auto b = compute_probs(spec, t2, m_max, {Engine::Direct, Stage::Stage2, 24});
    double ca = 0.0, cb = 0.0, prev = 0.0;
    for (std::size_t m = 0; m <= m_max; ++m) {
      ca += a.probs[m];
      cb += b.probs[m];
      if (ca < prev - slack) o.fail(describe(spec) + ": CDF decreases in m at m=" + std::to_string(m));
      if (cb > ca + slack) {
        o.fail(describe(spec) + ": CDF increases in t at m=" + std::to_string(m));
        o.worst = std::max(o.worst, cb - ca);
      }
      prev = ca;
    }
  }
  return o;
}

/// S is in [0, 1], S + F = 1, and S is non-increasing on a random time grid.
inline Outcome survival_monotone(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, 5.0);
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const auto spec = random_spec(rng, 0.3, 3.0);
    std::vector<double> ts(40);
    for (auto& t : ts) t = ut(rng);
    std::sort(ts.begin(), ts.end());
    double prev = 1.0;
    for (double t : ts) {
      const auto p = survival_pair(spec, t);
      if (!(p.survival >= 0.0 && p.survival <= 1.0) || p.survival + p.cdf != 1.0) {
        o.fail(describe(spec) + ": bad pair at t=" + std::to_string(t));
      }
      if (p.survival > prev) o.fail(describe(spec) + ": survival increases at t=" + std::to_string(t));
      prev = p.survival;
    }
  }
  return o;
}

/// aic = -2 ll + 2 k and bic = -2 ll + k ln n for fits to random samples.
inline Outcome aic_bic_identities(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Outcome o;
  const ModelFamily families[] = {ModelFamily::Poisson, ModelFamily::Weibull, ModelFamily::Gamma};
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const double lambda = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    std::poisson_distribution<unsigned> pois(lambda);
    std::vector<unsigned> counts(std::uniform_int_distribution<int>(20, 80)(rng));
    for (auto& c : counts) c = pois(rng);
    ModelSpec spec;
    spec.family = families[i % 3];
    spec.numerics.n_steps = 24;
    const auto r = fit(spec, CountData::from_counts(counts));
    const double k = static_cast<double>(r.n_params), n = static_cast<double>(r.n_obs);
    if (r.aic != -2.0 * r.log_likelihood + 2.0 * k || r.bic != -2.0 * r.log_likelihood + k * std::log(n) ||
        r.n_params != parameter_count(spec) || r.n_obs != counts.size()) {
      o.fail(std::string(model_family_name(spec.family)) + " case " + std::to_string(i));
    }
  }
  return o;
}

/// Same seed gives the same counts regardless of thread count; a different
/// seed gives different counts.
inline Outcome simulation_reproducible(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const auto spec = random_spec(rng);
    const std::uint64_t s = rng();
    const auto a = simulate_pmf(spec, 1.0, 400, s, 1);
    const auto b = simulate_pmf(spec, 1.0, 400, s, 3);
    const auto c = simulate_pmf(spec, 1.0, 400, s + 1, 1);
    if (a.counts != b.counts) o.fail(describe(spec) + ": thread count changed the result");
    if (a.counts == c.counts) o.fail(describe(spec) + ": seed had no effect");
  }
  return o;
}

/// Direct, De Pril and addition-chain engines agree after the same
/// extrapolation.
inline Outcome cross_engine(int cases, std::uint64_t seed, Stage stage, double tol, double max_intensity = 4.0) {
  std::mt19937_64 rng(seed);
  const std::size_t grids[] = {16, 24, 48};
  Outcome o;
  for (int i = 0; i < cases; ++i, ++o.cases) {
    const double t = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    const auto spec = random_spec(rng, 0.6, 2.0, t, max_intensity);
    const auto m = std::uniform_int_distribution<unsigned>(0, 12)(rng);
    const std::size_t n = grids[std::uniform_int_distribution<int>(0, 2)(rng)];
    const double d = compute_prob(spec, t, m, {Engine::Direct, stage, n});
    const double p = compute_prob(spec, t, m, {Engine::DePril, stage, n});
    const double c = compute_prob(spec, t, m, {Engine::Chain, stage, n});
    const double dev = std::max({std::abs(d - p), std::abs(d - c), std::abs(p - c)});
    o.worst = std::max(o.worst, dev);
    if (!(dev <= tol)) {
      std::ostringstream msg;
      msg << describe(spec) << " t=" << t << " m=" << m << " N=" << n << " diff=" << dev;
      o.fail(msg.str());
    }
  }
  return o;
}

}  // namespace props
