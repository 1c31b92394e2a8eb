#pragma once

// Monte Carlo simulation of renewal and delayed renewal counts, used as an
// independent check on the convolution engines.
//
// Random numbers come from a counter-based generator: the u for the k-th
// inter-arrival time of draw i is a pure function of (seed, i, k), so results
// do not depend on the platform, the thread count, or the order of draws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/modified_renewal.hpp"

namespace renewal_count {

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kMix1 = 0xBF58476D1CE4E5B9ull;
inline constexpr std::uint64_t kMix2 = 0x94D049BB133111EBull;
inline constexpr std::uint64_t kStream = 0xD1B54A32D192ED03ull;

/// splitmix64 finalizer.
inline constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * kMix1;
  z = (z ^ (z >> 27)) * kMix2;
  return z ^ (z >> 31);
}

/// 64 random bits for position (draw, index) of stream `seed`.
inline constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t draw, std::uint64_t index) {
  return mix(mix(seed * kGolden + draw * kStream) + (index + 1) * kGolden);
}

/// Uniform on the open interval (0, 1): (top 53 bits + 1/2) / 2^53.
inline constexpr double uniform(std::uint64_t seed, std::uint64_t draw, std::uint64_t index) {
  return (static_cast<double>(bits(seed, draw, index) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rng

namespace detail {

/// F^{-1}(u) by bisection on ln t until F is resolved to about 1e-12.
inline double invert_cdf_numerically(const DistributionSpec& spec, double u) {
  double lo = 1.0, hi = 1.0;
  while (cdf(spec, lo) > u) {
    lo *= 0.5;
    if (lo < 1e-300) return lo;
  }
  while (cdf(spec, hi) < u) {
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    const auto p = survival_pair(spec, mid);
    if (p.cdf < u) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Inverse distribution function at u in (0, 1).
inline double sample_interarrival(const DistributionSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform variate must lie in (0, 1)");
  const double hazard = -std::log1p(-u);  // -ln(1 - u)
  switch (spec.family()) {
    case Family::Exponential: return hazard / spec.get<ExponentialParams>().rate;
    case Family::Weibull: {
      const auto& p = spec.get<WeibullParams>();
      return std::pow(hazard, 1.0 / p.beta) / p.alpha;
    }
    case Family::BurrXII: {
      const auto& p = spec.get<BurrParams>();
      return std::pow(std::expm1(hazard / p.nu), 1.0 / p.beta) / p.alpha;
    }
    case Family::Gamma:
    case Family::GenGamma: return detail::invert_cdf_numerically(spec, u);
  }
  return 0.0;
}

/// Counts N(t) over n draws.
struct EmpiricalPmf {
  std::vector<std::uint64_t> counts;  // counts[m] = draws with N(t) = m
  std::uint64_t n_draws = 0;
  double horizon = 0.0;

  double probability(std::size_t m) const {
    return m < counts.size() ? static_cast<double>(counts[m]) / static_cast<double>(n_draws) : 0.0;
  }
  /// Binomial standard error of probability(m).
  double std_error(std::size_t m) const {
    const double p = probability(m);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_draws));
  }
  std::size_t max_count() const { return counts.empty() ? 0 : counts.size() - 1; }
};

/// Thread cap from RENEWAL_COUNT_THREADS (unset or 0: hardware concurrency).
inline unsigned thread_limit() {
  unsigned n = 0;
  if (const char* env = std::getenv("RENEWAL_COUNT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

namespace detail {

inline std::uint64_t count_events(const DistributionSpec& first, const DistributionSpec& rest, double t,
                                  std::uint64_t seed, std::uint64_t draw) {
  double clock = 0.0;
  std::uint64_t k = 0;
  while (true) {
    const double u = rng::uniform(seed, draw, k);
    clock += sample_interarrival(k == 0 ? first : rest, u);
    if (clock > t) return k;
    ++k;
  }
}

inline EmpiricalPmf simulate(const DistributionSpec& first, const DistributionSpec& rest, double t,
                             std::uint64_t n_draws, std::uint64_t seed, unsigned threads) {
  if (n_draws < 1) throw DomainError("simulation needs at least one draw");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("simulation horizon must be positive");
  if (threads == 0) threads = thread_limit();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_draws));

  // Draws are split into contiguous blocks; merging adds counts.
  std::vector<std::vector<std::uint64_t>> partial(threads);
  auto work = [&](unsigned b) {
    const std::uint64_t begin = n_draws * b / threads, end = n_draws * (b + 1) / threads;
    auto& c = partial[b];
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t k = count_events(first, rest, t, seed, i);
      if (k >= c.size()) c.resize(k + 1, 0);
      ++c[k];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned b = 0; b < threads; ++b) pool.emplace_back(work, b);
    for (auto& th : pool) th.join();
  }

  EmpiricalPmf out;
  out.n_draws = n_draws;
  out.horizon = t;
  for (const auto& c : partial) {
    if (c.size() > out.counts.size()) out.counts.resize(c.size(), 0);
    for (std::size_t m = 0; m < c.size(); ++m) out.counts[m] += c[m];
  }
  return out;
}

}  // namespace detail

/// Empirical distribution of N(t) for an ordinary renewal process.
inline EmpiricalPmf simulate_pmf(const DistributionSpec& spec, double t, std::uint64_t n_draws, std::uint64_t seed,
                                 unsigned threads = 0) {
  return detail::simulate(spec, spec, t, n_draws, seed, threads);
}

/// Empirical distribution of N(t) for a delayed renewal process.
inline EmpiricalPmf simulate_pmf(const ModifiedSpec& spec, double t, std::uint64_t n_draws, std::uint64_t seed,
                                 unsigned threads = 0) {
  return detail::simulate(spec.first, spec.rest, t, n_draws, seed, threads);
}

}  // namespace renewal_count
