#pragma once

// Extrapolated count probabilities from any of the three engines.
//
// A stage-s result needs runs on N, 2N, .. 2^(r-1) N steps (r = 1, 2, 3, 5
// for Raw, Stage1, Stage2, Stage3). All runs read one survival table at the
// finest resolution, so the coarse runs add no survival evaluations.

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "renewal_count/conv_direct.hpp"
#include "renewal_count/conv_single.hpp"
#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/extrapolate.hpp"
#include "renewal_count/modified_renewal.hpp"
#include "renewal_count/probability_vector.hpp"
#include "renewal_count/survival_table.hpp"

namespace renewal_count {

enum class Engine { Direct, DePril, Chain };

inline constexpr std::size_t kDefaultStepsExtrapolated = 24;
inline constexpr std::size_t kDefaultStepsRaw = 132;

struct ComputeOptions {
  Engine engine = Engine::Direct;
  Stage stage = Stage::Stage2;
  std::size_t n_steps = 0;  // 0 selects the default for the stage
};

inline std::size_t default_steps(Stage stage) {
  return stage == Stage::Raw ? kDefaultStepsRaw : kDefaultStepsExtrapolated;
}

inline std::size_t base_steps(const ComputeOptions& o) { return o.n_steps == 0 ? default_steps(o.stage) : o.n_steps; }

inline std::size_t runs_for(Stage stage) {
  switch (stage) {
    case Stage::Raw: return 1;
    case Stage::Stage1: return 2;
    case Stage::Stage2: return 3;
    case Stage::Stage3: return 5;
  }
  return 1;
}

inline std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::Direct: return "direct";
    case Engine::DePril: return "depril";
    case Engine::Chain: return "chain";
  }
  return "unknown";
}

inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Raw: return "none";
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
    case Stage::Stage3: return "stage3";
  }
  return "unknown";
}

/// Combines runs on N, 2N, ... into the requested stage.
inline std::vector<double> combine_runs(std::span<const std::vector<double>> runs, Stage stage,
                                        const ExtrapolationScheme& scheme) {
  if (runs.size() != runs_for(stage)) throw ContractError("wrong number of runs for the extrapolation stage");
  switch (stage) {
    case Stage::Raw: return runs[0];
    case Stage::Stage1: return one_stage(runs[0], runs[1], scheme);
    case Stage::Stage2: return two_stage(runs[0], runs[1], runs[2], scheme);
    case Stage::Stage3: return three_stage(runs, scheme);
  }
  return runs[0];
}

inline double combine_scalar_runs(std::span<const double> runs, Stage stage, const ExtrapolationScheme& scheme) {
  std::vector<std::vector<double>> wrapped;
  for (double v : runs) wrapped.push_back({v});
  return combine_runs(wrapped, stage, scheme).front();
}

/// Finest grid of a doubling family starting at `base`.
inline std::size_t finest_steps(std::size_t base, Stage stage) { return base << (runs_for(stage) - 1); }

namespace detail {

inline void check_inputs(double t, std::size_t base) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("horizon must be positive");
  if (base < 1) throw DomainError("step count must be at least 1");
}

/// One engine run for a single m on a grid of n steps.
inline double single_run(const SurvivalTable& table, Engine engine, std::size_t n, unsigned m,
                         single::ConvolutionWorkspace& ws) {
  switch (engine) {
    case Engine::DePril: return single::depril_prob(table, n, m, ws);
    case Engine::Chain:
      if (m == 0) return table.endpoint(n, n).survival;
      return single::chain_prob(table, n, m).probability;
    case Engine::Direct: return direct::all_probs_raw(table, n, m).back();
  }
  return 0.0;
}

}  // namespace detail

/// P_m(t) from one engine at the requested extrapolation stage, reading
/// survival values from a table that holds the finest grid.
inline double extrapolated_prob(const SurvivalTable& table, std::size_t base, unsigned m, Engine engine, Stage stage,
                                const ExtrapolationScheme& scheme, single::ConvolutionWorkspace& ws) {
  std::vector<double> runs;
  for (std::size_t r = 0, n = base; r < runs_for(stage); ++r, n *= 2) runs.push_back(detail::single_run(table, engine, n, m, ws));
  return combine_scalar_runs(runs, stage, scheme);
}

/// P(at least m events by t) from the De Pril masses, extrapolated.
inline double extrapolated_censored(const SurvivalTable& table, std::size_t base, unsigned m, Stage stage,
                                    const ExtrapolationScheme& scheme, single::ConvolutionWorkspace& ws) {
  std::vector<double> runs;
  for (std::size_t r = 0, n = base; r < runs_for(stage); ++r, n *= 2) runs.push_back(single::depril_censored(table, n, m, ws));
  const double p = combine_scalar_runs(runs, stage, scheme);
  return p > 0.0 ? p : 0.0;
}

/// P_0(t) .. P_{m_max}(t). The direct engine produces all of them per run;
/// the single-probability engines are called once per m.
inline ProbabilityVector compute_probs(const DistributionSpec& spec, double t, std::size_t m_max,
                                       const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  const auto scheme = ExtrapolationScheme::for_distribution(spec);
  ProbabilityVector pv;
  pv.horizon = t;
  pv.grid_steps = base;
  pv.stage = options.stage;
  if (m_max == 0) {
    pv.probs = {survival(spec, t)};
    return pv;
  }
  const SurvivalTable table(spec, t, 2 * finest_steps(base, options.stage));
  if (options.engine == Engine::Direct) {
    if (base < 2) throw DomainError("direct convolution needs at least 2 steps");
    std::vector<std::vector<double>> runs;
    for (std::size_t r = 0, n = base; r < runs_for(options.stage); ++r, n *= 2) {
      runs.push_back(direct::all_probs_raw(table, n, m_max));
    }
    pv.probs = combine_runs(runs, options.stage, scheme);
    return pv;
  }
  single::ConvolutionWorkspace ws;
  pv.probs.resize(m_max + 1);
  for (std::size_t m = 0; m <= m_max; ++m) {
    pv.probs[m] = extrapolated_prob(table, base, static_cast<unsigned>(m), options.engine, options.stage, scheme, ws);
  }
  return pv;
}

/// A single P_m(t).
inline double compute_prob(const DistributionSpec& spec, double t, unsigned m, const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  if (m == 0) return survival(spec, t);
  const auto scheme = ExtrapolationScheme::for_distribution(spec);
  const std::size_t finest = finest_steps(base, options.stage);
  const bool endpoints_only = options.engine != Engine::Direct && m % 2 == 0;
  const SurvivalTable table(spec, t, endpoints_only ? finest : 2 * finest);
  single::ConvolutionWorkspace ws;
  return extrapolated_prob(table, base, m, options.engine, options.stage, scheme, ws);
}

/// P(at least m events by t), m >= 1, by integrating the m-fold density.
inline double compute_censored(const DistributionSpec& spec, double t, unsigned m, const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  if (m < 1) throw DomainError("censored probability needs m >= 1");
  const auto scheme = ExtrapolationScheme::for_distribution(spec);
  const SurvivalTable table(spec, t, finest_steps(base, options.stage));
  single::ConvolutionWorkspace ws;
  return extrapolated_censored(table, base, m, options.stage, scheme, ws);
}

// Delayed renewal processes.

inline ProbabilityVector compute_probs(const ModifiedSpec& spec, double t, std::size_t m_max,
                                       const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  const auto scheme = ExtrapolationScheme::for_distributions(spec.first, spec.rest);
  ProbabilityVector pv;
  pv.horizon = t;
  pv.grid_steps = base;
  pv.stage = options.stage;
  const std::size_t k = 2 * finest_steps(base, options.stage);
  const SurvivalTable first(spec.first, t, k);
  const SurvivalTable rest(spec.rest, t, k);
  std::vector<std::vector<double>> runs;
  for (std::size_t r = 0, n = base; r < runs_for(options.stage); ++r, n *= 2) {
    runs.push_back(modified::all_probs_raw(first, rest, n, m_max));
  }
  pv.probs = combine_runs(runs, options.stage, scheme);
  return pv;
}

inline double compute_prob(const ModifiedSpec& spec, double t, unsigned m, const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  if (m == 0) return survival(spec.first, t);
  const auto scheme = ExtrapolationScheme::for_distributions(spec.first, spec.rest);
  const std::size_t k = single::table_resolution(finest_steps(base, options.stage), m);
  const SurvivalTable first(spec.first, t, k);
  const SurvivalTable rest(spec.rest, t, k);
  single::ConvolutionWorkspace ws;
  std::vector<double> runs;
  for (std::size_t r = 0, n = base; r < runs_for(options.stage); ++r, n *= 2) {
    runs.push_back(modified::prob(first, rest, n, m, ws));
  }
  return combine_scalar_runs(runs, options.stage, scheme);
}

/// P(N(t) >= m) for a delayed process, m >= 1.
inline double compute_censored(const ModifiedSpec& spec, double t, unsigned m, const ComputeOptions& options = {}) {
  const std::size_t base = base_steps(options);
  detail::check_inputs(t, base);
  const auto scheme = ExtrapolationScheme::for_distributions(spec.first, spec.rest);
  const std::size_t k = single::table_resolution(finest_steps(base, options.stage), m);
  const SurvivalTable first(spec.first, t, k);
  const SurvivalTable rest(spec.rest, t, k);
  std::vector<double> runs;
  for (std::size_t r = 0, n = base; r < runs_for(options.stage); ++r, n *= 2) {
    runs.push_back(modified::censored(first, rest, n, m));
  }
  return combine_scalar_runs(runs, options.stage, scheme);
}

}  // namespace renewal_count
