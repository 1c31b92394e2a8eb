#pragma once

// A single count probability P_m(t) without computing P_1 .. P_{m-1}.
//
// The inter-arrival distribution is replaced by a lattice variable taking
// value j with probability q_j = F((j+1) h) - F(j h). The m-fold lattice sum
// at index k stands for continuous sums spread over [k h, (k + m) h), so its
// mass is placed at (k + m/2) h. Then
//
//   P_m(t)     ~ sum_k w_k f_k^{(m)} S(t - (k + m/2) h)
//   P_{>=m}(t) ~ sum_k w_k f_k^{(m)}
//
// over the lattice points that do not pass t, with w_k = 1/2 for the point
// that falls exactly on t (even m only) and 1 otherwise. The m-fold masses
// come from the De Pril recursion in O(N^2), or from an addition chain of
// pairwise convolutions in O(log(m) N^2).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/survival_table.hpp"

namespace renewal_count::single {

/// A sequence stored as values * exp(log_scale).
template <class Real>
struct ScaledMasses {
  std::vector<Real> values;
  Real log_scale{0};
};

/// m-fold self-convolution of q truncated to q.size() points, by De Pril's
/// recursion, run on q / q_0 and rescaled on the fly so that neither q_0^m
/// nor the normalized terms leave the floating point range.
template <class Real>
ScaledMasses<Real> depril_scaled(std::span<const Real> q, unsigned m) {
  using std::log;
  if (q.empty()) throw DomainError("De Pril recursion needs a non-empty mass sequence");
  if (m < 1) throw DomainError("De Pril recursion needs m >= 1");
  if (!(q[0] > Real(0))) throw DomainError("De Pril recursion needs q[0] > 0; refine or shift the grid");

  const std::size_t n = q.size();
  const Real inv_q0 = Real(1) / q[0];
  std::vector<Real> qn(n), jqn(n);
  for (std::size_t j = 0; j < n; ++j) {
    qn[j] = q[j] * inv_q0;
    jqn[j] = Real(static_cast<double>(j)) * qn[j];
  }

  ScaledMasses<Real> out;
  out.values.assign(n, Real(0));
  out.values[0] = Real(1);
  out.log_scale = Real(static_cast<double>(m)) * log(q[0]);
  const Real big(1e200);
  const Real shrink(1e-200);
  const Real m_plus_1(static_cast<double>(m) + 1.0);
  auto& f = out.values;
  for (std::size_t k = 1; k < n; ++k) {
    // f_k = sum_{j=1}^{k} ((m+1) j / k - 1) qn_j f_{k-j}
    Real weighted(0), plain(0);
    for (std::size_t j = 1; j <= k; ++j) {
      weighted += jqn[j] * f[k - j];
      plain += qn[j] * f[k - j];
    }
    f[k] = m_plus_1 * weighted / Real(static_cast<double>(k)) - plain;
    if (f[k] > big || -f[k] > big) {
      for (std::size_t i = 0; i <= k; ++i) f[i] *= shrink;
      out.log_scale -= log(shrink);
    }
  }
  return out;
}

/// m-fold self-convolution of q (f_0 = q_0^m), truncated to q.size() points.
template <class Real>
std::vector<Real> depril_convolution(std::span<const Real> q, unsigned m) {
  using std::exp;
  ScaledMasses<Real> s = depril_scaled(q, m);
  const Real scale = exp(s.log_scale);
  for (auto& v : s.values) v *= scale;
  return s.values;
}

inline std::vector<double> depril_convolution(const std::vector<double>& q, unsigned m) {
  return depril_convolution<double>(std::span<const double>(q), m);
}

/// a * b truncated to `length` points.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b, std::size_t length) {
  std::vector<double> out(length, 0.0);
  for (std::size_t k = 0; k < length; ++k) {
    double acc = 0.0;
    const std::size_t lo = k + 1 > b.size() ? k + 1 - b.size() : 0;
    const std::size_t hi = std::min(k, a.size() - 1);
    for (std::size_t i = lo; i <= hi && i < a.size(); ++i) acc += a[i] * b[k - i];
    out[k] = acc;
  }
  return out;
}

/// f * f truncated to f.size() points, pairing f_i f_{k-i} with f_{k-i} f_i
/// so that only half the products are formed.
inline std::vector<double> self_convolve_symmetric(std::span<const double> f) {
  if (f.empty()) throw DomainError("self-convolution of an empty sequence");
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    const std::size_t half = (k + 1) / 2;  // i < k - i
    for (std::size_t i = 0; i < half; ++i) acc += f[i] * f[k - i];
    acc *= 2.0;
    if (k % 2 == 0) acc += f[k / 2] * f[k / 2];
    out[k] = acc;
  }
  return out;
}

struct ChainResult {
  std::vector<double> masses;
  unsigned convolutions = 0;
};

/// Number of pairwise convolutions the addition chain needs for order m:
/// one per doubling plus one per extra set bit.
inline unsigned chain_convolution_count(unsigned m) {
  if (m < 1) throw DomainError("addition chain needs m >= 1");
  const unsigned doublings = static_cast<unsigned>(std::bit_width(m)) - 1;
  return doublings + static_cast<unsigned>(std::popcount(m)) - 1;
}

/// m-fold self-convolution of q along the binary decomposition of m.
inline ChainResult chain_convolution(std::span<const double> q, unsigned m) {
  if (q.empty()) throw DomainError("addition chain needs a non-empty mass sequence");
  if (m < 1) throw DomainError("addition chain needs m >= 1");
  ChainResult out;
  std::vector<double> power(q.begin(), q.end());
  bool have_result = false;
  for (unsigned rest = m; rest != 0; rest >>= 1) {
    if (rest & 1u) {
      if (!have_result) {
        out.masses = power;
        have_result = true;
      } else {
        out.masses = convolve(out.masses, power, q.size());
        ++out.convolutions;
      }
    }
    if (rest > 1) {
      power = self_convolve_symmetric(power);
      ++out.convolutions;
    }
  }
  return out;
}

/// Index range and end weight of the lattice points at or before t for the
/// m-fold sum on an n-cell grid: k = 0..last, weight 1/2 at `last` when that
/// point sits exactly on t.
struct LatticeRange {
  bool empty = true;
  std::size_t last = 0;
  bool half_at_last = false;
};

inline LatticeRange lattice_range(std::size_t n_steps, unsigned m) {
  const std::size_t offset = (static_cast<std::size_t>(m) + 1) / 2;  // ceil(m/2)
  if (offset > n_steps) return {};
  return {false, n_steps - offset, m % 2 == 0};
}

/// sum_k w_k f_k S(t - (k + m/2) h); for even m only endpoint samples are read.
inline double lattice_survival_integral(const SurvivalTable& table, std::size_t n_steps, unsigned m,
                                        std::span<const double> f, double log_scale = 0.0) {
  const LatticeRange range = lattice_range(n_steps, m);
  if (range.empty) return 0.0;
  double sum = 0.0;
  if (m % 2 == 0) {
    table.require_endpoints(n_steps);
    for (std::size_t k = 0; k < range.last; ++k) sum += f[k] * table.endpoint(n_steps, range.last - k).survival;
    sum += 0.5 * f[range.last];  // S(0) = 1
  } else {
    table.require_midpoints(n_steps);
    for (std::size_t k = 0; k <= range.last; ++k) sum += f[k] * table.midpoint(n_steps, range.last - k).survival;
  }
  return log_scale == 0.0 ? sum : sum * std::exp(log_scale);
}

/// sum_k w_k f_k: the probability that the m-th event has happened by t.
inline double lattice_mass_integral(std::size_t n_steps, unsigned m, std::span<const double> f,
                                    double log_scale = 0.0) {
  const LatticeRange range = lattice_range(n_steps, m);
  if (range.empty) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k <= range.last; ++k) sum += f[k];
  if (range.half_at_last) sum -= 0.5 * f[range.last];
  const double p = log_scale == 0.0 ? sum : sum * std::exp(log_scale);
  return p > 0.0 ? p : 0.0;
}

/// Caller-owned buffers for repeated single-probability evaluations. Not to be
/// shared between concurrent calls.
struct ConvolutionWorkspace {
  std::vector<double> q;
  ScaledMasses<double> f;
  bool used_chain = false;  // last call fell back to the addition chain
};

/// True when scaled masses look like a sub-probability sequence: no
/// material negative entries and a total of at most one. The recursion
/// subtracts large terms when q_0 is small against later masses (steep
/// hazards on fine grids), and its failures show up as sign oscillation.
inline bool plausible_masses(const ScaledMasses<double>& f) {
  double max_abs = 0.0, sum = 0.0;
  for (double v : f.values) {
    if (!std::isfinite(v)) return false;
    max_abs = std::max(max_abs, std::abs(v));
    sum += v;
  }
  if (max_abs == 0.0) return true;
  for (double v : f.values) {
    if (v < -1e-13 * max_abs) return false;
  }
  return sum <= 0.0 || std::log(sum) + f.log_scale <= 1e-9;
}

/// m-fold masses of ws.q into ws.f: the recursion, or the chain when the
/// recursion result fails the plausibility check. m = 1 needs neither.
inline void fill_convolution(ConvolutionWorkspace& ws, unsigned m) {
  ws.used_chain = false;
  if (m == 1) {
    ws.f.values = ws.q;
    ws.f.log_scale = 0.0;
    return;
  }
  ws.f = depril_scaled<double>(ws.q, m);
  if (plausible_masses(ws.f)) return;
  ws.used_chain = true;
  ws.f.values = chain_convolution(ws.q, m).masses;
  ws.f.log_scale = 0.0;
}

/// Survival table resolution a single evaluation needs on an n-step grid:
/// even m reads only endpoints, odd m also needs midpoints.
inline std::size_t table_resolution(std::size_t n_steps, unsigned m) { return m % 2 == 0 ? n_steps : 2 * n_steps; }

inline double depril_prob(const SurvivalTable& table, std::size_t n_steps, unsigned m, ConvolutionWorkspace& ws) {
  if (n_steps == 0) throw DomainError("De Pril: step count must be at least 1");
  if (m == 0) {
    table.require_endpoints(n_steps);
    return table.endpoint(n_steps, n_steps).survival;
  }
  ws.q = table.cell_masses(n_steps);
  fill_convolution(ws, m);
  return lattice_survival_integral(table, n_steps, m, ws.f.values, ws.f.log_scale);
}

inline double depril_prob(const SurvivalTable& table, std::size_t n_steps, unsigned m) {
  ConvolutionWorkspace ws;
  return depril_prob(table, n_steps, m, ws);
}

/// P_m(t) with survival values taken from `sampler` (callable double -> SurvivalPair).
template <class Sampler>
double depril_prob_sampled(const Sampler& sampler, double t, unsigned m, std::size_t n_steps) {
  if (n_steps == 0) throw DomainError("De Pril: step count must be at least 1");
  if (m == 0) return sampler(t).survival;
  const SurvivalTable table(sampler, t, table_resolution(n_steps, m));
  return depril_prob(table, n_steps, m);
}

inline double depril_prob(const DistributionSpec& spec, double t, unsigned m, std::size_t n_steps) {
  if (!(t > 0.0)) throw DomainError("De Pril: horizon must be positive");
  return depril_prob_sampled([&spec](double x) { return survival_pair(spec, x); }, t, m, n_steps);
}

/// P(at least m events by t) by integrating the m-fold density, not by
/// differencing the P_i.
inline double depril_censored(const SurvivalTable& table, std::size_t n_steps, unsigned m, ConvolutionWorkspace& ws) {
  if (m < 1) throw DomainError("censored probability needs m >= 1");
  ws.q = table.cell_masses(n_steps);
  fill_convolution(ws, m);
  return lattice_mass_integral(n_steps, m, ws.f.values, ws.f.log_scale);
}

inline double depril_censored(const DistributionSpec& spec, double t, unsigned m, std::size_t n_steps) {
  if (m < 1) throw DomainError("censored probability needs m >= 1");
  if (n_steps == 0) throw DomainError("De Pril: step count must be at least 1");
  if (!(t > 0.0)) throw DomainError("De Pril: horizon must be positive");
  const SurvivalTable table(spec, t, n_steps);
  ConvolutionWorkspace ws;
  return depril_censored(table, n_steps, m, ws);
}

struct ChainProb {
  double probability = 0.0;
  unsigned convolutions = 0;
};

inline ChainProb chain_prob(const SurvivalTable& table, std::size_t n_steps, unsigned m) {
  if (m < 1) throw DomainError("addition chain needs m >= 1");
  if (n_steps == 0) throw DomainError("addition chain: step count must be at least 1");
  const std::vector<double> q = table.cell_masses(n_steps);
  const ChainResult chain = chain_convolution(q, m);
  return {lattice_survival_integral(table, n_steps, m, chain.masses), chain.convolutions};
}

inline ChainProb chain_prob(const DistributionSpec& spec, double t, unsigned m, std::size_t n_steps) {
  if (m < 1) throw DomainError("addition chain needs m >= 1");
  if (!(t > 0.0)) throw DomainError("addition chain: horizon must be positive");
  const SurvivalTable table(spec, t, table_resolution(n_steps, m));
  return chain_prob(table, n_steps, m);
}

}  // namespace renewal_count::single
