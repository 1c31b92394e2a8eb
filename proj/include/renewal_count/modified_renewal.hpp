#pragma once

// Delayed (modified) renewal processes: the time to the first event has its
// own distribution, later inter-arrival times share another.
//
//   m = 0   P_0(t) = S_first(t)
//   m = 1   first-event masses against the survival of `rest`
//   m >= 2  (m-1)-fold lattice sum of `rest`, convolved with the first-event
//           masses, then integrated against the survival of `rest`
//
// The lattice continuity correction is unchanged: m lattice variables put the
// sum at (k + m/2) h, with the half weight on a point that lands on t.

#include <cstddef>
#include <vector>

#include "renewal_count/conv_single.hpp"
#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/probability_vector.hpp"
#include "renewal_count/survival_table.hpp"

namespace renewal_count {

struct ModifiedSpec {
  DistributionSpec first;  // time to the first event
  DistributionSpec rest;   // subsequent inter-arrival times
};

namespace modified {

inline void require_matching(const SurvivalTable& first, const SurvivalTable& rest) {
  if (first.horizon() != rest.horizon() || first.resolution() != rest.resolution()) {
    throw ContractError("first-event and renewal tables must share horizon and resolution");
  }
}

inline double prob(const SurvivalTable& first, const SurvivalTable& rest, std::size_t n_steps, unsigned m,
                   single::ConvolutionWorkspace& ws) {
  require_matching(first, rest);
  if (n_steps == 0) throw DomainError("modified renewal: step count must be at least 1");
  if (m == 0) {
    first.require_endpoints(n_steps);
    return first.endpoint(n_steps, n_steps).survival;
  }
  const std::vector<double> q_first = first.cell_masses(n_steps);
  if (m == 1) return single::lattice_survival_integral(rest, n_steps, 1, q_first);
  ws.q = rest.cell_masses(n_steps);
  single::fill_convolution(ws, m - 1);
  const std::vector<double> f = single::convolve(ws.f.values, q_first, n_steps);
  return single::lattice_survival_integral(rest, n_steps, m, f, ws.f.log_scale);
}

inline double prob(const SurvivalTable& first, const SurvivalTable& rest, std::size_t n_steps, unsigned m) {
  single::ConvolutionWorkspace ws;
  return prob(first, rest, n_steps, m, ws);
}

inline double modified_prob(const ModifiedSpec& spec, double t, unsigned m, std::size_t n_steps) {
  if (!(t > 0.0)) throw DomainError("modified renewal: horizon must be positive");
  if (n_steps == 0) throw DomainError("modified renewal: step count must be at least 1");
  if (m == 0) return survival(spec.first, t);
  const std::size_t k = single::table_resolution(n_steps, m);
  const SurvivalTable first(spec.first, t, k);
  const SurvivalTable rest(spec.rest, t, k);
  return prob(first, rest, n_steps, m);
}

/// P(at least m events by t), m >= 1.
inline double censored(const SurvivalTable& first, const SurvivalTable& rest, std::size_t n_steps, unsigned m) {
  require_matching(first, rest);
  if (m < 1) throw DomainError("censored probability needs m >= 1");
  const std::vector<double> q_first = first.cell_masses(n_steps);
  if (m == 1) return single::lattice_mass_integral(n_steps, 1, q_first);
  single::ConvolutionWorkspace ws;
  ws.q = rest.cell_masses(n_steps);
  single::fill_convolution(ws, m - 1);
  const std::vector<double> f = single::convolve(ws.f.values, q_first, n_steps);
  return single::lattice_mass_integral(n_steps, m, f, ws.f.log_scale);
}

/// P_0 .. P_{m_max} sharing the cell masses and the growing (k-1)-fold sums.
inline std::vector<double> all_probs_raw(const SurvivalTable& first, const SurvivalTable& rest, std::size_t n_steps,
                                         std::size_t m_max) {
  require_matching(first, rest);
  if (n_steps == 0) throw DomainError("modified renewal: step count must be at least 1");
  std::vector<double> probs(m_max + 1);
  first.require_endpoints(n_steps);
  probs[0] = first.endpoint(n_steps, n_steps).survival;
  if (m_max == 0) return probs;
  const std::vector<double> q_first = first.cell_masses(n_steps);
  const std::vector<double> q_rest = rest.cell_masses(n_steps);
  std::vector<double> rest_sum;  // (m-1)-fold sum of `rest`
  for (std::size_t m = 1; m <= m_max; ++m) {
    std::vector<double> f;
    if (m == 1) {
      f = q_first;
    } else {
      rest_sum = m == 2 ? q_rest : single::convolve(rest_sum, q_rest, n_steps);
      f = single::convolve(rest_sum, q_first, n_steps);
    }
    probs[m] = single::lattice_survival_integral(rest, n_steps, static_cast<unsigned>(m), f);
  }
  return probs;
}

inline ProbabilityVector modified_all_probs(const ModifiedSpec& spec, double t, std::size_t m_max,
                                            std::size_t n_steps) {
  if (!(t > 0.0)) throw DomainError("modified renewal: horizon must be positive");
  ProbabilityVector pv;
  pv.horizon = t;
  pv.grid_steps = n_steps;
  if (m_max == 0) {
    pv.probs = {survival(spec.first, t)};
    return pv;
  }
  const SurvivalTable first(spec.first, t, 2 * n_steps);
  const SurvivalTable rest(spec.rest, t, 2 * n_steps);
  pv.probs = all_probs_raw(first, rest, n_steps, m_max);
  return pv;
}

}  // namespace modified
}  // namespace renewal_count
