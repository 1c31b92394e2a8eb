#pragma once

#include <cstddef>
#include <functional>
#include <type_traits>
#include <vector>

#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"

namespace renewal_count {

/// Survival pairs sampled once at k * t / K, k = 0..K. Any grid of N steps with
/// K divisible by N (endpoints) or by 2N (endpoints and midpoints) reads its
/// values from the table, so a family of doubled grids shares one set of
/// evaluations of the (expensive) survival function.
class SurvivalTable {
 public:
  template <class Sampler>
    requires std::is_invocable_r_v<SurvivalPair, const Sampler&, double>
  SurvivalTable(const Sampler& sampler, double horizon, std::size_t resolution)
      : horizon_(horizon), points_(resolution + 1) {
    if (resolution == 0) throw DomainError("survival table: resolution must be at least 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("survival table: horizon must be positive");
    points_[0] = sampler(0.0);
    for (std::size_t k = 1; k < resolution; ++k) {
      points_[k] = sampler(horizon * static_cast<double>(k) / static_cast<double>(resolution));
    }
    points_[resolution] = sampler(horizon);
  }

  SurvivalTable(const DistributionSpec& spec, double horizon, std::size_t resolution)
      : SurvivalTable([&spec](double x) { return survival_pair(spec, x); }, horizon, resolution) {}

  double horizon() const { return horizon_; }
  std::size_t resolution() const { return points_.size() - 1; }
  const SurvivalPair& at(std::size_t k) const { return points_[k]; }

  bool has_endpoints(std::size_t n_steps) const { return n_steps > 0 && resolution() % n_steps == 0; }
  bool has_midpoints(std::size_t n_steps) const { return n_steps > 0 && resolution() % (2 * n_steps) == 0; }

  /// Value at j h for a grid of n_steps cells, j = 0..n_steps.
  const SurvivalPair& endpoint(std::size_t n_steps, std::size_t j) const {
    return points_[j * (resolution() / n_steps)];
  }
  /// Value at (i + 1/2) h, i = 0..n_steps-1.
  const SurvivalPair& midpoint(std::size_t n_steps, std::size_t i) const {
    return points_[(2 * i + 1) * (resolution() / (2 * n_steps))];
  }

  /// Masses of the cells [j h, (j+1) h), j = 0..n_steps-1.
  std::vector<double> cell_masses(std::size_t n_steps) const {
    require_endpoints(n_steps);
    std::vector<double> q(n_steps);
    for (std::size_t j = 0; j < n_steps; ++j) q[j] = cell_mass(endpoint(n_steps, j), endpoint(n_steps, j + 1));
    return q;
  }

  /// Masses of the cells shifted left by half a step: [0, h/2) followed by
  /// [(j - 1/2) h, (j + 1/2) h), j = 1..n_steps-1, i.e. cells centred on j h.
  std::vector<double> shifted_cell_masses(std::size_t n_steps) const {
    require_midpoints(n_steps);
    std::vector<double> q(n_steps);
    q[0] = cell_mass(points_[0], midpoint(n_steps, 0));
    for (std::size_t j = 1; j < n_steps; ++j) q[j] = cell_mass(midpoint(n_steps, j - 1), midpoint(n_steps, j));
    return q;
  }

  void require_endpoints(std::size_t n_steps) const {
    if (!has_endpoints(n_steps)) throw ContractError("survival table does not contain the endpoints of this grid");
  }
  void require_midpoints(std::size_t n_steps) const {
    if (!has_midpoints(n_steps)) throw ContractError("survival table does not contain the midpoints of this grid");
  }

 private:
  double horizon_;
  std::vector<SurvivalPair> points_;
};

}  // namespace renewal_count
