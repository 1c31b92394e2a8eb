// Acceptance runner: one PASS/FAIL/SKIP line per criterion, indented detail
// lines underneath. Exits 0 once every criterion has been evaluated; pass
// --strict to exit 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "properties.hpp"
#include "renewal_count/renewal_count.hpp"

using namespace renewal_count;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Verdict {
  bool pass = true;
  bool skipped = false;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok    " : "MISS  ") + what);
  }
  void note(const std::string& what) { notes.push_back("      " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double poisson_pmf(double a, unsigned m) { return std::exp(-a + m * std::log(a) - std::lgamma(m + 1.0)); }

const Engine kEngines[] = {Engine::Direct, Engine::DePril, Engine::Chain};

std::vector<double> engine_probs(const DistributionSpec& spec, double t, unsigned m_max, Engine e, const ComputeOptions& o) {
  if (e == Engine::Direct) return compute_probs(spec, t, m_max, o).probs;
  std::vector<double> p;
  for (unsigned m = 0; m <= m_max; ++m) p.push_back(compute_prob(spec, t, m, {e, o.stage, o.n_steps}));
  return p;
}

Verdict poisson_limit() {
  Verdict v;
  const auto start = clock_type::now();
  for (double a : {0.5, 1.0, 2.38}) {
    for (Engine e : kEngines) {
      const auto p = engine_probs(DistributionSpec::weibull(a, 1.0), 1.0, 8, e, {e, Stage::Stage2, 24});
      double worst = 0.0;
      unsigned at = 0;
      for (unsigned m = 0; m <= 8; ++m) {
        const double rel = std::abs(p[m] / poisson_pmf(a, m) - 1.0);
        if (rel > worst) worst = rel, at = m;
      }
      v.check(worst < 1e-6, fmt("alpha=%.2f %-6s N=24 stage2: max relative error %.2e (m=%u) < 1e-6", a,
                                std::string(engine_name(e)).c_str(), worst, at));
    }
  }
  const double elapsed = seconds_since(start);
  v.check(elapsed < 1.0, fmt("runtime %.3f s < 1 s", elapsed));
  // Target accuracy read as absolute error on each P_m.
  for (Engine e : kEngines) {
    const std::size_t n = e == Engine::DePril ? 36 : 24;
    const auto p = engine_probs(DistributionSpec::weibull(2.38, 1.0), 1.0, 8, e, {e, Stage::Stage2, n});
    double worst = 0.0;
    for (unsigned m = 0; m <= 8; ++m) worst = std::max(worst, std::abs(p[m] - poisson_pmf(2.38, m)));
    v.check(worst < 1e-8, fmt("target alpha=2.38 %-6s N=%zu: max absolute error %.2e < 1e-8",
                              std::string(engine_name(e)).c_str(), n, worst));
  }
  return v;
}

Verdict gamma_oracle() {
  Verdict v;
  const double t = 1.0;
  for (double k : {0.7, 1.5}) {
    const double rate = 2.38 * k;  // mean count near 2.4
    const auto spec = DistributionSpec::gamma(k, rate);
    for (Engine e : kEngines) {
      const auto p = engine_probs(spec, t, 8, e, {e, Stage::Stage2, 24});
      double worst = 0.0;
      for (unsigned m = 0; m <= 8; ++m) {
        const double lower = m == 0 ? 1.0 : boost::math::gamma_p(m * k, rate * t);
        const double exact = lower - boost::math::gamma_p((m + 1) * k, rate * t);
        worst = std::max(worst, std::abs(p[m] - exact));
      }
      v.check(worst < 1e-6, fmt("shape=%.1f rate=%.3f %-6s N=24 stage2: max error %.2e < 1e-6", k, rate,
                                std::string(engine_name(e)).c_str(), worst));
    }
  }
  return v;
}

double median(std::vector<double> xs) {
  xs.erase(std::remove_if(xs.begin(), xs.end(), [](double x) { return !std::isfinite(x); }), xs.end());
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Verdict error_orders() {
  Verdict v;
  const auto start = clock_type::now();
  for (double beta : {0.6, 1.2}) {
    std::vector<double> raw, s1, s2;
    for (const auto& r : order_study(DistributionSpec::weibull(1.0, beta), 1.0, 24, 14)) {
      raw.push_back(r.gamma_raw);
      s1.push_back(r.gamma_stage1);
      s2.push_back(r.gamma_stage2);
    }
    const double g0 = median(raw), g1 = median(s1), g2 = median(s2);
    v.note(fmt("beta=%.1f median order over m=1..14: raw %.2f, stage1 %.2f, stage2 %.2f", beta, g0, g1, g2));
    if (beta < 1.0) {
      v.check(g0 >= 1.3 && g0 <= 1.9, fmt("beta=0.6 raw %.2f in [1.3, 1.9]", g0));
      v.check(g0 < g1 && g1 < g2, "beta=0.6 order rises across stages");
      v.check(std::abs(g1 - 2.0) <= 0.4, fmt("beta=0.6 stage1 %.2f within 2 +- 0.4", g1));
      v.check(std::abs(g2 - 2.6) <= 0.4, fmt("beta=0.6 stage2 %.2f within 2.6 +- 0.4", g2));
    } else {
      v.check(g0 >= 1.7 && g0 <= 2.3, fmt("beta=1.2 raw %.2f in [1.7, 2.3]", g0));
      v.check(g2 > g0, "beta=1.2 final stage above raw");
      v.check(g2 >= 2.5 && g2 <= 4.5, fmt("beta=1.2 final %.2f in [3 - 0.5, 4 + 0.5]", g2));
    }
  }
  const double elapsed = seconds_since(start);
  v.check(elapsed < 30.0, fmt("runtime %.1f s < 30 s", elapsed));
  return v;
}

Verdict cross_engine() {
  Verdict v;
  const auto o = props::cross_engine(50, 4, Stage::Stage3, 5e-8);
  v.check(o.ok(), fmt("%d cases, %d outside 5e-8, largest difference %.2e", o.cases, o.failures, o.worst));
  if (!o.ok()) v.note("first: " + o.first_failure);
  return v;
}

Verdict ordinality() {
  Verdict v;
  const auto spec = DistributionSpec::weibull(1.0, 1.2);
  auto time_of = [&](Engine e, unsigned m) { return bench_engine(spec, 1.0, e, m, 48, 7, 5e-3).seconds; };
  const double p4 = time_of(Engine::DePril, 4), p64 = time_of(Engine::DePril, 64);
  const double d4 = time_of(Engine::Direct, 4), d64 = time_of(Engine::Direct, 64);
  v.check(p64 / p4 < 1.5, fmt("depril N=48: t(m=64)/t(m=4) = %.2f < 1.5", p64 / p4));
  v.check(d64 / d4 > 8.0, fmt("direct N=48: t(m=64)/t(m=4) = %.2f > 8", d64 / d4));
  return v;
}

Verdict delayed_renewal() {
  Verdict v;
  const ModifiedSpec exp_exp{DistributionSpec::exponential(1.0), DistributionSpec::exponential(2.0)};
  const double exact = std::exp(-2.0) * (std::exp(1.0) - 1.0);
  const double p1 = compute_prob(exp_exp, 1.0, 1);
  v.check(std::abs(p1 - exact) < 1e-7, fmt("exp(1) then exp(2), m=1: error %.2e < 1e-7", std::abs(p1 - exact)));

  // The delayed path convolves on the same lattice as the De Pril engine; the
  // direct engine differs by its own discretization error.
  const auto w = DistributionSpec::weibull(1.0, 1.2);
  const auto same = compute_probs(ModifiedSpec{w, w}, 1.0, 8).probs;
  const auto lattice = engine_probs(w, 1.0, 8, Engine::DePril, {Engine::DePril, Stage::Stage2, 24});
  const auto direct = compute_probs(w, 1.0, 8).probs;
  double diff = 0.0, diff_direct = 0.0;
  for (std::size_t m = 0; m <= 8; ++m) {
    diff = std::max(diff, std::abs(same[m] - lattice[m]));
    diff_direct = std::max(diff_direct, std::abs(same[m] - direct[m]));
  }
  v.check(diff < 1e-9, fmt("first == rest vs ordinary De Pril, m <= 8: max difference %.2e < 1e-9", diff));
  v.note(fmt("vs the direct engine: max difference %.2e", diff_direct));

  const ModifiedSpec hurdle{DistributionSpec::weibull(0.5, 1.2), w};
  const auto pmf = simulate_pmf(hurdle, 1.0, 1000000, 20240601);
  const auto probs = compute_probs(hurdle, 1.0, pmf.max_count()).probs;
  double worst_z = 0.0;
  for (std::size_t m = 0; m <= pmf.max_count(); ++m) {
    // binomial standard error at the convolution value
    const double se = std::sqrt(probs[m] * (1.0 - probs[m]) / static_cast<double>(pmf.n_draws));
    if (se > 0.0) worst_z = std::max(worst_z, std::abs(pmf.probability(m) - probs[m]) / se);
  }
  v.check(worst_z <= 4.0, fmt("weibull(0.5,1.2) then weibull(1,1.2) vs 1e6 draws: largest |z| %.2f <= 4 over m=0..%zu",
                              worst_z, pmf.max_count()));
  return v;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

Verdict fertility() {
  Verdict v;
  const std::string path = env_or("RENEWAL_COUNT_FERTILITY", RENEWAL_COUNT_DATA_DIR "/fertility_counts.csv");
  CountData data;
  try {
    data = read_count_csv_file(path, "children");
  } catch (const Error& e) {
    v.skipped = true;
    v.note(std::string("dataset unavailable: ") + e.what());
    return v;
  }
  v.note(fmt("dataset %s, %zu rows", path.c_str(), data.size()));
  auto fit_of = [&](ModelFamily f) {
    ModelSpec s;
    s.family = f;
    return fit(s, data);
  };
  const auto pois = fit_of(ModelFamily::Poisson);
  const auto weib = fit_of(ModelFamily::Weibull);
  const auto gg = fit_of(ModelFamily::GenGamma);
  const struct {
    const char* name;
    const FitResult& r;
    double target;
  } lls[] = {{"poisson", pois, -2186.78}, {"weibull", weib, -2180.36}, {"gengamma", gg, -2167.18}};
  for (const auto& l : lls) {
    v.check(std::abs(l.r.log_likelihood - l.target) <= 0.05,
            fmt("%s log-likelihood %.3f vs %.2f within 0.05", l.name, l.r.log_likelihood, l.target));
  }
  const auto& shape = weib.coefficient("shape");
  v.check(std::abs(shape.estimate - 1.12) <= 0.01, fmt("weibull shape %.4f within 1.12 +- 0.01", shape.estimate));
  v.check(shape.std_error && std::abs(*shape.std_error - 0.03) <= 0.01,
          fmt("weibull shape SE %.4f within 0.03 +- 0.01", shape.std_error ? *shape.std_error : std::nan("")));
  const auto gof = gof_chisq(pois, data);
  v.check(std::abs(gof.statistic - 126.16) <= 0.5 && gof.df == 6,
          fmt("poisson chi-squared %.3f (df %zu) vs 126.16 (df 6) within 0.5", gof.statistic, gof.df));

  const char* full = std::getenv("RENEWAL_COUNT_FERTILITY_FULL");
  if (!full || !*full) {
    v.note("regression checks skipped: set RENEWAL_COUNT_FERTILITY_FULL to a CSV with covariate columns");
    return v;
  }
  // Weibull regression column: coefficient and SE per covariate.
  const struct {
    const char* column;
    double coef, se;
  } table[] = {{"german", -0.223, 0.072},     {"years_school", 0.039, 0.033}, {"voc_train", -0.173, 0.044},
               {"university", -0.181, 0.160}, {"catholic", 0.242, 0.070},     {"protestant", 0.123, 0.076},
               {"muslim", 0.639, 0.087},      {"rural", 0.068, 0.038},        {"year_birth", 0.002, 0.002},
               {"age_marriage", -0.034, 0.006}};
  std::vector<std::string> covariates;
  for (const auto& c : table) covariates.push_back(c.column);
  const auto reg_data = read_count_csv_file(full, "children", covariates);
  ModelSpec s;
  s.family = ModelFamily::Weibull;
  s.formula = covariates;
  const auto reg = fit(s, reg_data);
  v.check(std::abs(reg.log_likelihood + 2077.0) <= 0.5,
          fmt("weibull regression log-likelihood %.2f vs -2077.0 within 0.5", reg.log_likelihood));
  for (const auto& c : table) {
    const double est = reg.coefficient(c.column).estimate;
    v.check(std::abs(est - c.coef) <= 2.0 * c.se, fmt("%s %.4f vs %.3f within 2 SE", c.column, est, c.coef));
  }
  return v;
}

Verdict properties() {
  Verdict v;
  const auto start = clock_type::now();
  const struct {
    const char* name;
    std::function<props::Outcome()> run;
  } suites[] = {
      {"normalization", [] { return props::normalization(200, 801); }},
      {"normalization (delayed)", [] { return props::normalization_delayed(200, 802); }},
      {"count CDF monotone", [] { return props::count_cdf_monotone(200, 803); }},
      {"survival monotone", [] { return props::survival_monotone(200, 804); }},
      {"AIC/BIC identities", [] { return props::aic_bic_identities(200, 805); }},
      {"seed-reproducible simulation", [] { return props::simulation_reproducible(200, 806); }},
  };
  for (const auto& s : suites) {
    const auto suite_start = clock_type::now();
    const auto o = s.run();
    v.check(o.ok() && o.cases >= 200, fmt("%s: %d cases, %d failures, worst %.2e, %.1f s", s.name, o.cases,
                                          o.failures, o.worst, seconds_since(suite_start)));
    if (!o.ok()) v.note("first: " + o.first_failure);
  }
  const double elapsed = seconds_since(start);
  v.check(elapsed < 120.0, fmt("total runtime %.1f s < 120 s", elapsed));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const struct {
    const char* title;
    Verdict (*run)();
  } criteria[] = {
      {"Poisson limit", poisson_limit},
      {"gamma closed form", gamma_oracle},
      {"error orders", error_orders},
      {"cross-engine agreement", cross_engine},
      {"De Pril ordinality independence", ordinality},
      {"delayed renewal", delayed_renewal},
      {"fertility data", fertility},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const char* status = v.skipped ? "SKIP" : v.pass ? "PASS" : "FAIL";
    failed += !v.skipped && !v.pass;
    std::printf("criterion %zu: %s  %s\n", i + 1, status, criteria[i].title);
    for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(criteria));
  return strict && failed > 0 ? 1 : 0;
}
