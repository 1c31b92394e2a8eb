#pragma once

#include <cstddef>
#include <vector>

namespace renewal_count {

enum class Stage { Raw, Stage1, Stage2, Stage3 };

/// P_0(t) .. P_m(t) for one parameter set. `probs` holds the values as
/// computed (they may dip a few ulps below zero); use `clamped()` for output.
struct ProbabilityVector {
  std::vector<double> probs;
  double horizon = 0.0;
  std::size_t grid_steps = 0;
  Stage stage = Stage::Raw;

  std::size_t m_max() const { return probs.empty() ? 0 : probs.size() - 1; }

  std::vector<double> clamped() const {
    std::vector<double> out(probs);
    for (auto& p : out) p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    return out;
  }
};

/// P(N_t >= m + 1) = 1 - sum of the vector, floored at zero.
inline double censored_tail(const ProbabilityVector& pv) {
  double sum = 0.0;
  for (double p : pv.probs) sum += p;
  const double tail = 1.0 - sum;
  return tail > 0.0 ? tail : 0.0;
}

}  // namespace renewal_count
