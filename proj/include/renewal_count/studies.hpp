#pragma once

// Error-order study against a fine-grid reference, and engine timings.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "renewal_count/compute.hpp"
#include "renewal_count/conv_direct.hpp"
#include "renewal_count/conv_single.hpp"
#include "renewal_count/extrapolate.hpp"
#include "renewal_count/survival_table.hpp"

namespace renewal_count {

inline constexpr std::size_t kReferenceSteps = 20000;

struct OrderStudyRow {
  std::size_t m;
  double raw_err, stage1_err, stage2_err;        // proportional errors at the base grid
  double gamma_raw, gamma_stage1, gamma_stage2;  // log2 of the error ratio between N and 2N
};

namespace detail {

inline double order_from_errors(double coarse, double fine) {
  if (coarse == 0.0 || fine == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(std::abs(coarse) / std::abs(fine));
}

inline void direct_runs(const DistributionSpec& spec, double t, std::size_t m_max, std::size_t base, std::size_t runs,
                        std::vector<std::vector<double>>& out) {
  const SurvivalTable table(spec, t, 2 * (base << (runs - 1)));
  out.clear();
  for (std::size_t r = 0, n = base; r < runs; ++r, n *= 2) out.push_back(direct::all_probs_raw(table, n, m_max));
}

}  // namespace detail

/// Proportional errors of the raw, one-stage and two-stage direct estimates
/// on N steps, and the error powers seen between N and 2N. The reference is
/// the two-stage value from reference/4, reference/2 and reference steps.
inline std::vector<OrderStudyRow> order_study(const DistributionSpec& spec, double t, std::size_t base, std::size_t m_max,
                                              std::size_t reference = kReferenceSteps) {
  if (base < 2) throw DomainError("order study needs at least 2 steps");
  if (reference % 4 != 0 || reference / 4 < 2) throw DomainError("reference step count must be a multiple of 4");
  const auto scheme = ExtrapolationScheme::for_distribution(spec);
  std::vector<std::vector<double>> ref_runs, runs;
  detail::direct_runs(spec, t, m_max, reference / 4, 3, ref_runs);
  const auto ref = two_stage(ref_runs[0], ref_runs[1], ref_runs[2], scheme);
  detail::direct_runs(spec, t, m_max, base, 4, runs);  // N, 2N, 4N, 8N

  const auto s1_coarse = one_stage(runs[0], runs[1], scheme), s1_fine = one_stage(runs[1], runs[2], scheme);
  const auto s2_coarse = two_stage(runs[0], runs[1], runs[2], scheme);
  const auto s2_fine = two_stage(runs[1], runs[2], runs[3], scheme);

  std::vector<OrderStudyRow> rows;
  for (std::size_t m = 1; m <= m_max; ++m) {
    auto err = [&](double v) { return v / ref[m] - 1.0; };
    OrderStudyRow r{m, err(runs[0][m]), err(s1_coarse[m]), err(s2_coarse[m]), 0, 0, 0};
    r.gamma_raw = detail::order_from_errors(r.raw_err, err(runs[1][m]));
    r.gamma_stage1 = detail::order_from_errors(r.stage1_err, err(s1_fine[m]));
    r.gamma_stage2 = detail::order_from_errors(r.stage2_err, err(s2_fine[m]));
    rows.push_back(r);
  }
  return rows;
}

struct BenchRow {
  Engine engine;
  unsigned m;
  std::size_t n_steps;
  double seconds;                     // median over repetitions, per call
  std::optional<unsigned> convolutions;  // addition-chain engine only
};

/// Median time of one raw engine call for P_m on N steps. The survival table
/// is built once outside the timed region; each repetition repeats the call
/// until at least `min_seconds` have passed.
inline BenchRow bench_engine(const DistributionSpec& spec, double t, Engine engine, unsigned m, std::size_t n_steps,
                             unsigned repetitions, double min_seconds = 2e-3) {
  if (repetitions < 1) throw DomainError("bench needs at least one repetition");
  if (m < 1) throw DomainError("bench needs m >= 1");
  const SurvivalTable table(spec, t, 2 * n_steps);
  single::ConvolutionWorkspace ws;
  volatile double sink = 0.0;
  auto call = [&] { sink = sink + detail::single_run(table, engine, n_steps, m, ws); };
  using clock = std::chrono::steady_clock;
  std::vector<double> times;
  for (unsigned r = 0; r < repetitions; ++r) {
    std::size_t calls = 0;
    const auto start = clock::now();
    double elapsed = 0.0;
    do {
      call();
      ++calls;
      elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < min_seconds);
    times.push_back(elapsed / static_cast<double>(calls));
  }
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2), times.end());
  BenchRow row{engine, m, n_steps, times[times.size() / 2], std::nullopt};
  if (engine == Engine::Chain) row.convolutions = single::chain_convolution_count(m);
  return row;
}

}  // namespace renewal_count
