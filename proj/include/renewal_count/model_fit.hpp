#pragma once

// Maximum likelihood for renewal count models.
//
// Observation i has count y_i over the window [0, 1] and covariates x_i; the
// inter-arrival distribution has rate alpha_i = exp(x_i' gamma) and shared
// shape parameters. A hurdle model gives the first event its own rate
// exp(x_i' gamma + delta).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "renewal_count/compute.hpp"
#include "renewal_count/count_data.hpp"
#include "renewal_count/distribution.hpp"
#include "renewal_count/error.hpp"
#include "renewal_count/mc_oracle.hpp"
#include "renewal_count/modified_renewal.hpp"
#include "renewal_count/optimize.hpp"

namespace renewal_count {

enum class ModelFamily { Poisson, Weibull, Gamma, GenGamma, Burr };

inline std::string_view model_family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::Poisson: return "poisson";
    case ModelFamily::Weibull: return "weibull";
    case ModelFamily::Gamma: return "gamma";
    case ModelFamily::GenGamma: return "gengamma";
    case ModelFamily::Burr: return "burr";
  }
  return "unknown";
}

inline ModelFamily parse_model_family(std::string_view name) {
  for (auto f : {ModelFamily::Poisson, ModelFamily::Weibull, ModelFamily::Gamma, ModelFamily::GenGamma, ModelFamily::Burr}) {
    if (model_family_name(f) == name) return f;
  }
  throw DomainError("unknown model family '" + std::string(name) + "'");
}

// Base grid for likelihood work. With N = 24 the Stage-2 errors of the
// higher counts add up to about 2e-4 in the log-likelihood of ~1200 rows;
// N = 48 brings that below 5e-5 at about the same cost.
inline constexpr std::size_t kLikelihoodSteps = 48;

struct ModelSpec {
  ModelFamily family = ModelFamily::Poisson;
  std::vector<std::string> formula;  // covariates besides the intercept
  bool hurdle = false;
  ComputeOptions numerics{Engine::DePril, Stage::Stage2, kLikelihoodSteps};
  double horizon = 1.0;
};

/// Shape parameters of a family, in natural units.
inline std::vector<std::string> shape_names(ModelFamily f) {
  switch (f) {
    case ModelFamily::Poisson: return {};
    case ModelFamily::Weibull: return {"shape"};
    case ModelFamily::Gamma: return {"shape"};
    case ModelFamily::GenGamma: return {"sigma", "q"};
    case ModelFamily::Burr: return {"shape", "nu"};
  }
  return {};
}

/// Parameter order: intercept, formula covariates, shapes, hurdle shift.
inline std::vector<std::string> parameter_names(const ModelSpec& spec) {
  std::vector<std::string> names{"(intercept)"};
  names.insert(names.end(), spec.formula.begin(), spec.formula.end());
  for (auto& s : shape_names(spec.family)) names.push_back(s);
  if (spec.hurdle) names.push_back("first_event");
  return names;
}

inline std::size_t parameter_count(const ModelSpec& spec) {
  return 1 + spec.formula.size() + shape_names(spec.family).size() + (spec.hurdle ? 1 : 0);
}

/// Inter-arrival distribution with rate alpha and the given shapes.
inline DistributionSpec model_distribution(ModelFamily family, double alpha, std::span<const double> shapes) {
  switch (family) {
    case ModelFamily::Poisson: return DistributionSpec::weibull(alpha, 1.0);
    case ModelFamily::Weibull: return DistributionSpec::weibull(alpha, shapes[0]);
    case ModelFamily::Gamma: return DistributionSpec::gamma(shapes[0], alpha);
    case ModelFamily::GenGamma: return DistributionSpec::gengamma(-std::log(alpha), shapes[0], shapes[1]);
    case ModelFamily::Burr: return DistributionSpec::burr(alpha, shapes[0], shapes[1]);
  }
  throw DomainError("unknown model family");
}

namespace detail {

/// Rows reduced to what the likelihood needs.
struct DesignRow {
  std::vector<double> x;  // leading 1 for the intercept
  unsigned count;
  bool censored;
};

inline std::vector<DesignRow> design(const ModelSpec& spec, const CountData& data) {
  std::vector<std::size_t> cols;
  for (const auto& name : spec.formula) {
    const auto idx = data.covariate_index(name);
    if (!idx) throw ContractError("covariate '" + name + "' is not in the data");
    cols.push_back(*idx);
  }
  std::vector<DesignRow> rows;
  rows.reserve(data.size());
  for (const auto& r : data.rows) {
    DesignRow d{{1.0}, r.count, r.censored};
    for (auto c : cols) d.x.push_back(r.covariates.at(c));
    rows.push_back(std::move(d));
  }
  return rows;
}

/// alpha keyed to 12 significant digits.
inline std::string quantize(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

struct Query {
  unsigned m;
  bool censored;  // P(at least m events)
  bool operator==(const Query&) const = default;
};

/// Probabilities for a list of queries at one (first, rest) rate pair.
class GroupEvaluator {
 public:
  GroupEvaluator(const ModelSpec& spec, std::span<const double> shapes) : spec_(spec), shapes_(shapes) {}

  std::vector<double> operator()(double alpha_first, double alpha_rest, std::span<const Query> queries) const {
    const auto rest = model_distribution(spec_.family, alpha_rest, shapes_);
    const std::size_t base = base_steps(spec_.numerics);
    const Stage stage = spec_.numerics.stage;
    const double t = spec_.horizon;
    const std::size_t resolution = 2 * finest_steps(base, stage);
    std::vector<double> out;
    out.reserve(queries.size());
    single::ConvolutionWorkspace ws;

    if (!spec_.hurdle) {
      const auto scheme = ExtrapolationScheme::for_distribution(rest);
      std::optional<SurvivalTable> table;
      for (const auto& q : queries) {
        if (q.m == 0) {
          out.push_back(q.censored ? 1.0 : survival(rest, t));
          continue;
        }
        if (!table) table.emplace(rest, t, resolution);
        out.push_back(q.censored ? extrapolated_censored(*table, base, q.m, stage, scheme, ws)
                                 : extrapolated_prob(*table, base, q.m, spec_.numerics.engine, stage, scheme, ws));
      }
      return out;
    }

    const auto first = model_distribution(spec_.family, alpha_first, shapes_);
    const auto scheme = ExtrapolationScheme::for_distributions(first, rest);
    std::optional<SurvivalTable> first_table, rest_table;
    for (const auto& q : queries) {
      if (q.m == 0) {
        out.push_back(q.censored ? 1.0 : survival(first, t));
        continue;
      }
      if (!first_table) {
        first_table.emplace(first, t, resolution);
        rest_table.emplace(rest, t, resolution);
      }
      std::vector<double> runs;
      for (std::size_t r = 0, n = base; r < runs_for(stage); ++r, n *= 2) {
        runs.push_back(q.censored ? modified::censored(*first_table, *rest_table, n, q.m)
                                  : modified::prob(*first_table, *rest_table, n, q.m, ws));
      }
      double p = combine_scalar_runs(runs, stage, scheme);
      if (q.censored && p < 0.0) p = 0.0;
      out.push_back(p);
    }
    return out;
  }

 private:
  const ModelSpec& spec_;
  std::span<const double> shapes_;
};

struct Unpacked {
  std::vector<double> gamma;
  std::vector<double> shapes;
  double delta = 0.0;
};

inline Unpacked unpack(const ModelSpec& spec, std::span<const double> params) {
  if (params.size() != parameter_count(spec)) throw ContractError("parameter vector has the wrong length");
  Unpacked u;
  const std::size_t p = 1 + spec.formula.size();
  u.gamma.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(p));
  u.shapes.assign(params.begin() + static_cast<std::ptrdiff_t>(p),
                  params.begin() + static_cast<std::ptrdiff_t>(p + shape_names(spec.family).size()));
  if (spec.hurdle) u.delta = params.back();
  return u;
}

/// Runs f(i) for i in [0, n) on up to thread_limit() threads.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t threads = std::min<std::size_t>(thread_limit(), n / 4);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t b = 0; b < threads; ++b) {
    pool.emplace_back([&, b] {
      for (std::size_t i = n * b / threads; i < n * (b + 1) / threads; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Per-row probabilities of the requested queries. Rows with the same
/// quantized rates share one evaluation.
template <class QueriesOf>
std::vector<std::vector<double>> row_probabilities(const ModelSpec& spec, std::span<const double> params,
                                                   const std::vector<DesignRow>& rows, QueriesOf&& queries_of) {
  const Unpacked u = unpack(spec, params);
  struct Group {
    double alpha_first, alpha_rest;
    std::vector<Query> queries;
    std::vector<double> probs;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> row_group(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < u.gamma.size(); ++j) eta += u.gamma[j] * rows[i].x[j];
    const double alpha = std::stod(quantize(std::exp(eta)));
    const double alpha_first = spec.hurdle ? std::stod(quantize(std::exp(eta + u.delta))) : alpha;
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(alpha_first > 0.0) || !std::isfinite(alpha_first)) {
      throw NumericalError("rate out of range");
    }
    const std::string key = quantize(alpha) + (spec.hurdle ? "/" + quantize(alpha_first) : "");
    auto [it, fresh] = index.try_emplace(key, groups.size());
    if (fresh) groups.push_back({alpha_first, alpha, {}, {}});
    row_group[i] = it->second;
    auto& g = groups[it->second];
    for (const Query& q : queries_of(rows[i])) {
      if (std::find(g.queries.begin(), g.queries.end(), q) == g.queries.end()) g.queries.push_back(q);
    }
  }

  const GroupEvaluator eval(spec, u.shapes);
  parallel_for(groups.size(), [&](std::size_t k) {
    auto& g = groups[k];
    g.probs = eval(g.alpha_first, g.alpha_rest, g.queries);
  });

  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& g = groups[row_group[i]];
    for (const Query& q : queries_of(rows[i])) {
      const auto pos = static_cast<std::size_t>(std::find(g.queries.begin(), g.queries.end(), q) - g.queries.begin());
      out[i].push_back(g.probs[pos]);
    }
  }
  return out;
}

inline void check_shapes(const ModelSpec& spec, std::span<const double> shapes) {
  const auto names = shape_names(spec.family);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (names[i] == "q") {
      if (!std::isfinite(shapes[i])) throw ParameterError("q must be finite");
    } else if (!(shapes[i] > 0.0) || !std::isfinite(shapes[i])) {
      throw ParameterError(names[i] + " must be positive");
    }
  }
}

inline constexpr double kUnderflow = 1e-300;

inline double log_likelihood(const ModelSpec& spec, std::span<const double> params, const std::vector<DesignRow>& rows) {
  check_shapes(spec, unpack(spec, params).shapes);
  const auto probs = row_probabilities(spec, params, rows, [](const DesignRow& r) {
    return std::vector<Query>{{r.count, r.censored}};
  });
  double ll = 0.0;
  for (const auto& p : probs) {
    if (!(p[0] > kUnderflow)) return -std::numeric_limits<double>::infinity();
    ll += std::log(p[0]);
  }
  return ll;
}

}  // namespace detail

/// Sum over rows of ln P(count_i) at the natural parameters (intercept,
/// covariate coefficients, shapes, hurdle shift). Returns -inf when any row
/// probability falls below 1e-300.
inline double log_likelihood(const ModelSpec& spec, std::span<const double> params, const CountData& data) {
  if (data.size() == 0) throw DomainError("log-likelihood of empty data");
  return detail::log_likelihood(spec, params, detail::design(spec, data));
}

struct Coefficient {
  std::string name;
  double estimate;
  std::optional<double> std_error;  // absent when the information matrix is not positive definite
};

struct FitResult {
  ModelSpec model;
  std::vector<Coefficient> coefficients;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_params = 0;
  std::size_t n_obs = 0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
  std::optional<double> scale;  // exp(intercept) for intercept-only models
  std::vector<double> observed;  // frequencies of counts 0..max, uncensored rows
  std::vector<double> expected;  // matching fitted frequencies; the last cell holds the tail

  std::vector<double> estimates() const {
    std::vector<double> v;
    for (const auto& c : coefficients) v.push_back(c.estimate);
    return v;
  }
  const Coefficient& coefficient(std::string_view name) const {
    for (const auto& c : coefficients) {
      if (c.name == name) return c;
    }
    throw ContractError("no coefficient named '" + std::string(name) + "'");
  }
};

/// Observed and expected frequencies of counts 0..M (M = largest observed
/// count; the expected M cell is P(at least M)). Censored rows are left out.
inline std::pair<std::vector<double>, std::vector<double>> frequency_table(const ModelSpec& spec,
                                                                           std::span<const double> params,
                                                                           const CountData& data) {
  auto rows = detail::design(spec, data);
  std::erase_if(rows, [](const detail::DesignRow& r) { return r.censored; });
  unsigned top = 0;
  for (const auto& r : rows) top = std::max(top, r.count);
  std::vector<double> observed(top + 1, 0.0), expected(top + 1, 0.0);
  for (const auto& r : rows) observed[r.count] += 1.0;
  std::vector<detail::Query> queries;
  for (unsigned m = 0; m < top; ++m) queries.push_back({m, false});
  queries.push_back({top, true});
  const auto probs = detail::row_probabilities(spec, params, rows, [&](const detail::DesignRow&) { return queries; });
  for (const auto& p : probs) {
    for (std::size_t m = 0; m < p.size(); ++m) expected[m] += p[m];
  }
  return {observed, expected};
}

struct OptimizerConfig {
  optimize::Config optimizer;
  double hessian_step = 1e-4;
};

namespace detail {

/// Map between the optimizer's working vector and the natural parameters.
/// Covariates are centred and scaled, positive shapes enter on the log scale.
struct Reparametrization {
  ModelSpec spec;
  std::vector<double> centre, spread;  // per formula covariate

  Reparametrization(const ModelSpec& s, const std::vector<DesignRow>& rows) : spec(s) {
    const std::size_t p = s.formula.size();
    centre.assign(p, 0.0);
    spread.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0.0, sq = 0.0;
      for (const auto& r : rows) mean += r.x[j + 1];
      mean /= static_cast<double>(rows.size());
      for (const auto& r : rows) sq += (r.x[j + 1] - mean) * (r.x[j + 1] - mean);
      const double sd = std::sqrt(sq / static_cast<double>(rows.size()));
      centre[j] = mean;
      spread[j] = sd > 0.0 ? sd : 1.0;
    }
  }

  bool log_scale(std::size_t shape_index) const { return shape_names(spec.family)[shape_index] != "q"; }

  std::vector<double> natural(const optimize::Vector& w) const {
    const std::size_t p = spec.formula.size();
    std::vector<double> v(static_cast<std::size_t>(w.size()));
    v[0] = w[0];
    for (std::size_t j = 0; j < p; ++j) {
      v[j + 1] = w[static_cast<Eigen::Index>(j + 1)] / spread[j];
      v[0] -= v[j + 1] * centre[j];
    }
    const std::size_t n_shapes = shape_names(spec.family).size();
    for (std::size_t k = 0; k < n_shapes; ++k) {
      const double x = w[static_cast<Eigen::Index>(p + 1 + k)];
      v[p + 1 + k] = log_scale(k) ? std::exp(x) : x;
    }
    if (spec.hurdle) v.back() = w[w.size() - 1];
    return v;
  }

  optimize::Vector working(std::span<const double> v) const {
    const std::size_t p = spec.formula.size();
    optimize::Vector w(static_cast<Eigen::Index>(v.size()));
    w[0] = v[0];
    for (std::size_t j = 0; j < p; ++j) {
      w[static_cast<Eigen::Index>(j + 1)] = v[j + 1] * spread[j];
      w[0] += v[j + 1] * centre[j];
    }
    const std::size_t n_shapes = shape_names(spec.family).size();
    for (std::size_t k = 0; k < n_shapes; ++k) {
      w[static_cast<Eigen::Index>(p + 1 + k)] = log_scale(k) ? std::log(v[p + 1 + k]) : v[p + 1 + k];
    }
    if (spec.hurdle) w[w.size() - 1] = v.back();
    return w;
  }

  /// d natural / d working.
  Eigen::MatrixXd jacobian(const optimize::Vector& w) const {
    const auto n = w.size();
    const std::size_t p = spec.formula.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t c = 0; c < p; ++c) {
      const auto col = static_cast<Eigen::Index>(c + 1);
      j(col, col) = 1.0 / spread[c];
      j(0, col) = -centre[c] / spread[c];
    }
    const auto nat = natural(w);
    for (std::size_t k = 0; k < shape_names(spec.family).size(); ++k) {
      const auto idx = static_cast<Eigen::Index>(p + 1 + k);
      if (log_scale(k)) j(idx, idx) = nat[static_cast<std::size_t>(idx)];
    }
    return j;
  }
};

/// Deterministic start: Poisson moment estimate for the rate, shapes that
/// reduce each family to (nearly) exponential inter-arrival times.
inline std::vector<double> start_values(const ModelSpec& spec, const std::vector<DesignRow>& rows) {
  double mean = 0.0;
  for (const auto& r : rows) mean += r.count;
  mean = std::max(mean / static_cast<double>(rows.size()), 0.05) / spec.horizon;
  std::vector<double> v(parameter_count(spec), 0.0);
  v[0] = std::log(mean);
  const std::size_t s = 1 + spec.formula.size();
  switch (spec.family) {
    case ModelFamily::Poisson: break;
    case ModelFamily::Weibull:
    case ModelFamily::Gamma: v[s] = 1.0; break;
    case ModelFamily::GenGamma:
      v[s] = 1.0;
      v[s + 1] = 1.0;
      break;
    case ModelFamily::Burr:
      // (1 + (a t)^b)^-nu is close to exp(-nu (a t)^b) for large nu
      v[s] = 1.0;
      v[s + 1] = 10.0;
      v[0] -= std::log(10.0);
      break;
  }
  return v;
}

}  // namespace detail

/// Maximum likelihood fit. Deterministic: fixed starting values, simplex then
/// quasi-Newton on the working parametrization.
inline FitResult fit(const ModelSpec& spec, const CountData& data, const OptimizerConfig& config = {}) {
  if (data.size() == 0) throw DomainError("cannot fit empty data");
  const auto rows = detail::design(spec, data);
  const detail::Reparametrization rep(spec, rows);
  const optimize::Objective objective = [&](const optimize::Vector& w) {
    try {
      return detail::log_likelihood(spec, rep.natural(w), rows);
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const auto start = detail::start_values(spec, rows);
  const auto opt = optimize::maximize(objective, rep.working(start), config.optimizer);

  FitResult r;
  r.model = spec;
  r.n_obs = rows.size();
  r.n_params = parameter_count(spec);
  r.log_likelihood = opt.value;
  r.converged = opt.converged && std::isfinite(opt.value);
  r.iterations = opt.simplex_iterations + opt.bfgs_iterations;
  r.evaluations = opt.evaluations;
  r.message = !std::isfinite(opt.value) ? "no point with finite log-likelihood found"
              : opt.converged           ? "converged"
                                        : "iteration limit reached";
  const auto k = static_cast<double>(r.n_params);
  r.aic = -2.0 * r.log_likelihood + 2.0 * k;
  r.bic = -2.0 * r.log_likelihood + k * std::log(static_cast<double>(r.n_obs));

  const auto natural = rep.natural(opt.x);
  std::vector<std::optional<double>> se(natural.size());
  if (std::isfinite(opt.value)) {
    // Observed information in the working parametrization, carried to the
    // natural parameters through the Jacobian (exact at a stationary point).
    const Eigen::MatrixXd info = -optimize::hessian(objective, opt.x, config.hessian_step);
    const Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (info.allFinite() && llt.info() == Eigen::Success) {
      const Eigen::MatrixXd j = rep.jacobian(opt.x);
      const Eigen::MatrixXd cov = j * llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols())) * j.transpose();
      for (std::size_t i = 0; i < se.size(); ++i) {
        const double var = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (var > 0.0 && std::isfinite(var)) se[i] = std::sqrt(var);
      }
    }
  }
  const auto names = parameter_names(spec);
  for (std::size_t i = 0; i < names.size(); ++i) r.coefficients.push_back({names[i], natural[i], se[i]});
  if (spec.formula.empty()) r.scale = std::exp(natural[0]);
  if (std::isfinite(opt.value)) std::tie(r.observed, r.expected) = frequency_table(spec, natural, data);
  return r;
}

/// Count pmf P_0 .. P_{m_max} at covariate values x (formula order, no intercept).
inline ProbabilityVector predict_pmf(const FitResult& fit, std::span<const double> x, std::size_t m_max) {
  const auto& spec = fit.model;
  if (x.size() != spec.formula.size()) throw ContractError("covariate vector does not match the model formula");
  const auto params = fit.estimates();
  const auto u = detail::unpack(spec, params);
  double eta = u.gamma[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += u.gamma[j + 1] * x[j];
  const auto rest = model_distribution(spec.family, std::exp(eta), u.shapes);
  if (!spec.hurdle) return compute_probs(rest, spec.horizon, m_max, spec.numerics);
  const ModifiedSpec delayed{model_distribution(spec.family, std::exp(eta + u.delta), u.shapes), rest};
  return compute_probs(delayed, spec.horizon, m_max, {Engine::Direct, spec.numerics.stage, spec.numerics.n_steps});
}

struct TestResult {
  double statistic;
  std::size_t df;
  double p_value;
};

inline double chi_squared_upper_tail(double x, std::size_t df) {
  if (df == 0) return x <= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(df)), x));
}

/// Likelihood ratio test of a restricted model nested in a full one.
inline TestResult lr_test(const FitResult& restricted, const FitResult& full) {
  if (restricted.n_obs != full.n_obs) throw ContractError("likelihood ratio test needs fits to the same data");
  if (full.n_params < restricted.n_params) throw ContractError("full model has fewer parameters than the restricted one");
  double stat = 2.0 * (full.log_likelihood - restricted.log_likelihood);
  if (stat < -1e-6) throw ContractError("likelihood ratio statistic is negative: models are not nested");
  stat = std::max(stat, 0.0);
  const std::size_t df = full.n_params - restricted.n_params;
  return {stat, df, chi_squared_upper_tail(stat, df)};
}

/// Pearson statistic after merging cells from the right until each has an
/// expected frequency of at least `min_expected`.
inline TestResult pearson_chisq(std::span<const double> observed, std::span<const double> expected,
                                std::size_t n_params, double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty()) throw ContractError("observed and expected cells differ");
  std::vector<double> o(observed.begin(), observed.end()), e(expected.begin(), expected.end());
  while (e.size() > 1 && e.back() < min_expected) {
    e[e.size() - 2] += e.back();
    o[o.size() - 2] += o.back();
    e.pop_back();
    o.pop_back();
  }
  if (e.size() < n_params + 2) throw ContractError("too few cells for the goodness-of-fit test");
  double stat = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!(e[i] > 0.0)) throw NumericalError("expected frequency is zero");
    stat += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  }
  const std::size_t df = e.size() - 1 - n_params;
  return {stat, df, chi_squared_upper_tail(stat, df)};
}

struct Binning {
  double min_expected = 5.0;
};

inline TestResult gof_chisq(const FitResult& fit, const CountData& data, const Binning& binning = {}) {
  const auto [observed, expected] = frequency_table(fit.model, fit.estimates(), data);
  return pearson_chisq(observed, expected, fit.n_params, binning.min_expected);
}

}  // namespace renewal_count
