#pragma once

// Command-line front end. run_cli() is the whole program minus main(), so the
// tests can drive it with captured streams.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "renewal_count/renewal_count.hpp"

namespace renewal_count::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline Engine parse_engine(const std::string& s) {
  if (s == "direct") return Engine::Direct;
  if (s == "depril") return Engine::DePril;
  if (s == "chain") return Engine::Chain;
  throw UsageError("unknown engine '" + s + "'");
}

inline Stage parse_stage(const std::string& s) {
  if (s == "none") return Stage::Raw;
  if (s == "stage1") return Stage::Stage1;
  if (s == "stage2") return Stage::Stage2;
  if (s == "stage3") return Stage::Stage3;
  throw UsageError("unknown extrapolation '" + s + "'");
}

struct ProbArgs {
  std::string dist, first_dist;
  double t = 1.0;
  std::optional<unsigned> m, m_max;
  std::string engine = "direct", extrapolate = "stage2";
  std::size_t n_steps = 0;
};

struct FitArgs {
  std::string data, family = "poisson", count_column = "count", frequencies;
  std::vector<std::string> covariates;
  bool hurdle = false;
  std::string engine = "depril", extrapolate = "stage2";
  std::size_t n_steps = kLikelihoodSteps;
  double min_expected = 5.0;
  int max_iterations = 0;  // 0 keeps the optimizer defaults
};

struct SimulateArgs {
  std::string dist, first_dist;
  double t = 1.0;
  std::uint64_t draws = 100000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

struct BenchArgs {
  std::string dist = "weibull(alpha=1,beta=1.2)";
  double t = 1.0;
  std::vector<std::string> engines{"direct", "depril", "chain"};
  std::vector<unsigned> m{4, 16, 64};
  std::vector<std::size_t> n_steps{48};
  unsigned repetitions = 5;
};

struct OrderArgs {
  std::vector<double> beta{1.1};
  double alpha = 1.0, t = 1.0;
  std::size_t n_steps = 24, m_max = 14, reference = kReferenceSteps;
};

inline void cmd_prob(const ProbArgs& a, std::ostream& out) {
  const Engine engine = parse_engine(a.engine);
  const ComputeOptions opts{engine, parse_stage(a.extrapolate), a.n_steps};
  const auto rest = parse_distribution(a.dist);
  std::vector<std::pair<unsigned, double>> rows;
  const unsigned lo = a.m ? *a.m : 0, hi = a.m ? *a.m : *a.m_max;
  if (a.first_dist.empty()) {
    if (a.m) {
      rows.emplace_back(*a.m, compute_prob(rest, a.t, *a.m, opts));
    } else {
      const auto pv = compute_probs(rest, a.t, *a.m_max, opts);
      for (unsigned m = 0; m <= hi; ++m) rows.emplace_back(m, pv.probs[m]);
    }
  } else {
    if (engine == Engine::Chain) throw UsageError("--first-dist supports the direct and depril engines only");
    const ModifiedSpec spec{parse_distribution(a.first_dist), rest};
    if (engine == Engine::Direct) {
      const auto pv = compute_probs(spec, a.t, hi, opts);
      for (unsigned m = lo; m <= hi; ++m) rows.emplace_back(m, pv.probs[m]);
    } else {
      for (unsigned m = lo; m <= hi; ++m) rows.emplace_back(m, compute_prob(spec, a.t, m, opts));
    }
  }
  for (const auto& [m, p] : rows) {
    if (!std::isfinite(p)) throw NumericalError("probability for m = " + std::to_string(m) + " is not finite");
  }
  out << "m,probability\n";
  for (const auto& [m, p] : rows) out << m << ',' << number(p) << '\n';
}

inline nlohmann::json fit_report(const FitResult& r, const std::optional<TestResult>& gof, const std::string& gof_error) {
  using nlohmann::json;
  json coefs = json::array();
  for (const auto& c : r.coefficients) {
    coefs.push_back({{"name", c.name},
                     {"estimate", c.estimate},
                     {"std_error", c.std_error ? json(*c.std_error) : json(nullptr)}});
  }
  json freq = json::array();
  for (std::size_t m = 0; m < r.expected.size(); ++m) {
    freq.push_back({{"count", m}, {"observed", r.observed[m]}, {"expected", r.expected[m]}});
  }
  json report{{"family", model_family_name(r.model.family)},
              {"covariates", r.model.formula},
              {"hurdle", r.model.hurdle},
              {"engine", engine_name(r.model.numerics.engine)},
              {"extrapolation", stage_name(r.model.numerics.stage)},
              {"n_steps", base_steps(r.model.numerics)},
              {"n_obs", r.n_obs},
              {"n_params", r.n_params},
              {"coefficients", coefs},
              {"scale", r.scale ? json(*r.scale) : json(nullptr)},
              {"log_likelihood", r.log_likelihood},
              {"aic", r.aic},
              {"bic", r.bic},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"evaluations", r.evaluations},
              {"message", r.message},
              {"expected_frequencies", freq}};
  if (r.scale && r.model.family == ModelFamily::Weibull) {
    // alpha^beta, the multiplier of t^beta in the cumulative hazard
    report["hazard_scale"] = std::pow(*r.scale, r.coefficient("shape").estimate);
  }
  if (gof) {
    report["gof"] = {{"statistic", gof->statistic}, {"df", gof->df}, {"p_value", gof->p_value}};
  } else {
    report["gof"] = nullptr;
    report["gof_error"] = gof_error;
  }
  return report;
}

inline int cmd_fit(const FitArgs& a, std::ostream& out) {
  ModelSpec spec;
  spec.family = parse_model_family(a.family);
  spec.formula = a.covariates;
  spec.hurdle = a.hurdle;
  spec.numerics = {parse_engine(a.engine), parse_stage(a.extrapolate), a.n_steps};
  const auto data = read_count_csv_file(a.data, a.count_column, a.covariates);
  OptimizerConfig config;
  if (a.max_iterations > 0) {
    config.optimizer.simplex_iterations = a.max_iterations;
    config.optimizer.bfgs_iterations = a.max_iterations;
  }
  const auto r = fit(spec, data, config);
  std::optional<TestResult> gof;
  std::string gof_error;
  if (!r.expected.empty()) {
    try {
      gof = pearson_chisq(r.observed, r.expected, r.n_params, a.min_expected);
    } catch (const Error& e) {
      gof_error = e.what();
    }
  }
  out << fit_report(r, gof, gof_error).dump(2) << '\n';
  if (!a.frequencies.empty()) {
    std::ofstream f(a.frequencies);
    if (!f) throw UsageError("cannot write '" + a.frequencies + "'");
    const double n = static_cast<double>(std::max<std::size_t>(1, r.n_obs));
    f << "count,observed,observed_pct,fitted,fitted_pct\n";
    for (std::size_t m = 0; m < r.expected.size(); ++m) {
      f << m << ',' << number(r.observed[m]) << ',' << number(100.0 * r.observed[m] / n) << ','
        << number(r.expected[m]) << ',' << number(100.0 * r.expected[m] / n) << '\n';
    }
  }
  return r.converged ? kExitOk : kExitNumerical;
}

inline void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto rest = parse_distribution(a.dist);
  const auto pmf = a.first_dist.empty()
                       ? simulate_pmf(rest, a.t, a.draws, *a.seed, a.threads)
                       : simulate_pmf(ModifiedSpec{parse_distribution(a.first_dist), rest}, a.t, a.draws, *a.seed, a.threads);
  out << "count,frequency,probability,std_error\n";
  for (std::size_t m = 0; m < pmf.counts.size(); ++m) {
    out << m << ',' << pmf.counts[m] << ',' << number(pmf.probability(m)) << ',' << number(pmf.std_error(m)) << '\n';
  }
}

inline void cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.engines.empty()) throw UsageError("bench needs at least one engine");
  const auto spec = parse_distribution(a.dist);
  out << "engine,m,n_steps,median_seconds,relative,convolutions\n";
  for (const auto& name : a.engines) {
    const Engine engine = parse_engine(name);
    for (std::size_t n : a.n_steps) {
      std::optional<double> first;
      for (unsigned m : a.m) {
        const auto row = bench_engine(spec, a.t, engine, m, n, a.repetitions);
        if (!first) first = row.seconds;
        out << name << ',' << m << ',' << n << ',' << number(row.seconds) << ',' << number(row.seconds / *first) << ','
            << (row.convolutions ? std::to_string(*row.convolutions) : "") << '\n';
      }
    }
  }
}

inline void cmd_order_study(const OrderArgs& a, std::ostream& out) {
  out << "beta,m,raw_err,stage1_err,stage2_err,gamma_raw,gamma_stage1,gamma_stage2\n";
  for (double beta : a.beta) {
    for (const auto& r : order_study(DistributionSpec::weibull(a.alpha, beta), a.t, a.n_steps, a.m_max, a.reference)) {
      out << number(beta) << ',' << r.m << ',' << number(r.raw_err) << ',' << number(r.stage1_err) << ','
          << number(r.stage2_err) << ',' << number(r.gamma_raw) << ',' << number(r.gamma_stage1) << ','
          << number(r.gamma_stage2) << '\n';
    }
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Count probabilities, fits and studies for renewal processes"};
  app.require_subcommand(1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the resolved options as JSON and exit");

  const std::vector<std::string> engines{"direct", "depril", "chain"};
  const std::vector<std::string> stages{"none", "stage1", "stage2", "stage3"};

  ProbArgs prob;
  auto* p = app.add_subcommand("prob", "Count probabilities P(N(t) = m)");
  p->add_option("--dist", prob.dist, "Inter-arrival distribution, e.g. weibull(alpha=1,beta=1.2)")->required();
  p->add_option("--first-dist", prob.first_dist, "Distribution of the first arrival (delayed renewal)");
  p->add_option("--t", prob.t, "Observation window");
  auto* m_opt = p->add_option("--m", prob.m, "A single count");
  auto* m_max_opt = p->add_option("--m-max", prob.m_max, "All counts 0..m-max");
  m_opt->excludes(m_max_opt);
  p->add_option("--engine", prob.engine)->check(CLI::IsMember(engines));
  p->add_option("--extrapolate", prob.extrapolate)->check(CLI::IsMember(stages));
  p->add_option("--n-steps", prob.n_steps, "Base grid (0: 24 extrapolated, 132 raw)");

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Maximum likelihood fit of a count model");
  f->add_option("--data", fa.data, "CSV with a header row")->required();
  f->add_option("--family", fa.family)->check(CLI::IsMember({"poisson", "weibull", "gamma", "gengamma", "burr"}));
  f->add_option("--count-column", fa.count_column);
  f->add_option("--covariates", fa.covariates, "Comma-separated covariate columns")->delimiter(',');
  f->add_flag("--hurdle", fa.hurdle, "Separate rate for the first event");
  f->add_option("--engine", fa.engine)->check(CLI::IsMember(engines));
  f->add_option("--extrapolate", fa.extrapolate)->check(CLI::IsMember(stages));
  f->add_option("--n-steps", fa.n_steps);
  f->add_option("--frequencies", fa.frequencies, "Write observed and fitted frequencies to this CSV");
  f->add_option("--min-expected", fa.min_expected, "Smallest expected cell count in the chi-squared test");
  f->add_option("--max-iterations", fa.max_iterations, "Iteration cap per optimizer phase (0: defaults)");

  SimulateArgs sa;
  auto* s = app.add_subcommand("simulate", "Monte Carlo distribution of N(t)");
  s->add_option("--dist", sa.dist)->required();
  s->add_option("--first-dist", sa.first_dist);
  s->add_option("--t", sa.t);
  s->add_option("--draws", sa.draws);
  s->add_option("--seed", sa.seed)->required();
  s->add_option("--threads", sa.threads, "0: RENEWAL_COUNT_THREADS or all cores");

  BenchArgs ba;
  auto* b = app.add_subcommand("bench", "Engine timings");
  b->add_option("--dist", ba.dist);
  b->add_option("--t", ba.t);
  b->add_option("--engines", ba.engines)->delimiter(',')->check(CLI::IsMember(engines));
  b->add_option("--m", ba.m)->delimiter(',');
  b->add_option("--n-steps", ba.n_steps)->delimiter(',');
  b->add_option("--repetitions", ba.repetitions);

  OrderArgs oa;
  auto* o = app.add_subcommand("order-study", "Discretization error orders per extrapolation stage");
  o->add_option("--beta", oa.beta)->delimiter(',');
  o->add_option("--alpha", oa.alpha);
  o->add_option("--t", oa.t);
  o->add_option("--n-steps", oa.n_steps);
  o->add_option("--m-max", oa.m_max);
  o->add_option("--reference", oa.reference, "Finest reference grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*p && !prob.m && !prob.m_max) {
    err << "prob: one of --m or --m-max is required\n";
    return kExitUsage;
  }

  if (print_config) {
    using nlohmann::json;
    json c;
    if (*p) {
      c = {{"command", "prob"}, {"dist", prob.dist}, {"first_dist", prob.first_dist}, {"t", prob.t},
           {"m", prob.m ? json(*prob.m) : json(nullptr)}, {"m_max", prob.m_max ? json(*prob.m_max) : json(nullptr)},
           {"engine", prob.engine}, {"extrapolate", prob.extrapolate},
           {"n_steps", base_steps({Engine::Direct, parse_stage(prob.extrapolate), prob.n_steps})}};
    } else if (*f) {
      c = {{"command", "fit"}, {"data", fa.data}, {"family", fa.family}, {"count_column", fa.count_column},
           {"covariates", fa.covariates}, {"hurdle", fa.hurdle}, {"engine", fa.engine},
           {"extrapolate", fa.extrapolate}, {"n_steps", fa.n_steps}, {"min_expected", fa.min_expected},
           {"frequencies", fa.frequencies},
           {"max_iterations", fa.max_iterations == 0 ? OptimizerConfig{}.optimizer.simplex_iterations : fa.max_iterations}};
    } else if (*s) {
      c = {{"command", "simulate"}, {"dist", sa.dist}, {"first_dist", sa.first_dist}, {"t", sa.t},
           {"draws", sa.draws}, {"seed", *sa.seed}, {"threads", sa.threads == 0 ? thread_limit() : sa.threads}};
    } else if (*b) {
      c = {{"command", "bench"}, {"dist", ba.dist}, {"t", ba.t}, {"engines", ba.engines}, {"m", ba.m},
           {"n_steps", ba.n_steps}, {"repetitions", ba.repetitions}};
    } else {
      c = {{"command", "order-study"}, {"beta", oa.beta}, {"alpha", oa.alpha}, {"t", oa.t},
           {"n_steps", oa.n_steps}, {"m_max", oa.m_max}, {"reference", oa.reference}};
    }
    out << c.dump(2) << '\n';
    return kExitOk;
  }

  try {
    if (*p) cmd_prob(prob, out);
    if (*f) return cmd_fit(fa, out);
    if (*s) cmd_simulate(sa, out);
    if (*b) cmd_bench(ba, out);
    if (*o) cmd_order_study(oa, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace renewal_count::cli
