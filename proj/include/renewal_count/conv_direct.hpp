#pragma once

// All count probabilities P_0(t) .. P_m(t) by repeated discretized convolution.
//
// P_{m+1}(t) = int_0^t P_m(t - u) dF(u) is evaluated with an open midpoint
// rule whose cell masses come from differences of F. The work array holds
// P_m at the midpoints (i + 1/2) h. Convolving it with the ordinary cells
// [j h, (j+1) h) would land the result on the endpoints; convolving with the
// cells shifted left by h/2 (centred on j h) keeps it on the midpoints, so the
// shift costs no data movement.

#include <cstddef>
#include <vector>

#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/probability_vector.hpp"
#include "renewal_count/survival_table.hpp"

namespace renewal_count::direct {

/// Raw probabilities from a grid of `n_steps` cells read out of `table`
/// (which must contain the grid midpoints). Values are not clamped.
inline std::vector<double> all_probs_raw(const SurvivalTable& table, std::size_t n_steps, std::size_t m_max) {
  if (n_steps < 2) throw DomainError("direct convolution needs at least 2 steps");
  table.require_midpoints(n_steps);
  const std::size_t n = n_steps;

  std::vector<double> probs(m_max + 1);
  probs[0] = table.endpoint(n, n).survival;
  if (m_max == 0) return probs;

  const std::vector<double> q = table.cell_masses(n);
  const std::vector<double> q_shifted = table.shifted_cell_masses(n);
  std::vector<double> work(n);
  for (std::size_t i = 0; i < n; ++i) work[i] = table.midpoint(n, i).survival;

  for (std::size_t m = 1; m <= m_max; ++m) {
    // P_m(t) = sum_j q_j P_{m-1}(t - (j + 1/2) h)
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += q[j] * work[n - 1 - j];
    probs[m] = sum;
    if (m == m_max) break;
    // P_m at the midpoints; descending so work[i - j] is still P_{m-1}.
    for (std::size_t i = n; i-- > 0;) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += q_shifted[j] * work[i - j];
      work[i] = acc;
    }
  }
  return probs;
}

/// P_0(t) .. P_{m_max}(t) on a single grid of `n_steps` cells (no extrapolation).
inline ProbabilityVector all_probs(const DistributionSpec& spec, double t, std::size_t m_max, std::size_t n_steps) {
  if (n_steps < 2) throw DomainError("direct convolution needs at least 2 steps");
  if (!(t > 0.0)) throw DomainError("direct convolution: horizon must be positive");
  ProbabilityVector pv;
  pv.horizon = t;
  pv.grid_steps = n_steps;
  pv.stage = Stage::Raw;
  if (m_max == 0) {
    pv.probs = {survival(spec, t)};
    return pv;
  }
  const SurvivalTable table(spec, t, 2 * n_steps);
  pv.probs = all_probs_raw(table, n_steps, m_max);
  return pv;
}

}  // namespace renewal_count::direct
