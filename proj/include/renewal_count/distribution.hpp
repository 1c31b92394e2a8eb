#pragma once

// Inter-arrival time distributions: survival function, distribution function,
// discretized cell masses, and the `family(name=value,...)` text form.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "renewal_count/error.hpp"
#include "renewal_count/special_functions.hpp"

namespace renewal_count {

enum class Family { Exponential, Weibull, Gamma, GenGamma, BurrXII };

struct ExponentialParams {
  double rate;
  bool operator==(const ExponentialParams&) const = default;
};

/// S(t) = exp(-(alpha t)^beta); alpha is a rate, beta the shape.
struct WeibullParams {
  double alpha;
  double beta;
  bool operator==(const WeibullParams&) const = default;
};

/// Gamma inter-arrival times with shape k and rate alpha.
struct GammaParams {
  double shape;
  double rate;
  bool operator==(const GammaParams&) const = default;
};

/// Prentice parametrization: z = (ln t - mu) / sigma, gamma = 1 / q^2.
struct GenGammaParams {
  double mu;
  double sigma;
  double q;
  bool operator==(const GenGammaParams&) const = default;
};

/// S(t) = (1 + (alpha t)^beta)^(-nu).
struct BurrParams {
  double alpha;
  double beta;
  double nu;
  bool operator==(const BurrParams&) const = default;
};

/// Survival and distribution function at one time point. Exactly one of the
/// two is computed directly (whichever is smaller); the other is its
/// complement, so `survival + cdf == 1` holds in floating point.
struct SurvivalPair {
  double survival;
  double cdf;
};

namespace detail {

inline SurvivalPair from_cdf(double f) { return {1.0 - f, f}; }
inline SurvivalPair from_survival(double s) { return {s, 1.0 - s}; }

/// exp(-x) split so that the small side keeps its relative accuracy.
inline SurvivalPair from_cumulative_hazard(double x) {
  if (x < std::numbers::ln2) return from_cdf(-std::expm1(-x));
  return from_survival(std::exp(-x));
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace detail

class DistributionSpec {
 public:
  using Params = std::variant<ExponentialParams, WeibullParams, GammaParams, GenGammaParams, BurrParams>;

  static DistributionSpec exponential(double rate) {
    detail::require_positive(rate, "exponential rate");
    return DistributionSpec(ExponentialParams{rate});
  }
  static DistributionSpec weibull(double alpha, double beta) {
    detail::require_positive(alpha, "weibull alpha");
    detail::require_positive(beta, "weibull beta");
    return DistributionSpec(WeibullParams{alpha, beta});
  }
  static DistributionSpec gamma(double shape, double rate) {
    detail::require_positive(shape, "gamma shape");
    detail::require_positive(rate, "gamma rate");
    return DistributionSpec(GammaParams{shape, rate});
  }
  static DistributionSpec gengamma(double mu, double sigma, double q) {
    if (!std::isfinite(mu)) throw ParameterError("gengamma mu must be finite");
    if (!std::isfinite(q)) throw ParameterError("gengamma q must be finite");
    detail::require_positive(sigma, "gengamma sigma");
    return DistributionSpec(GenGammaParams{mu, sigma, q});
  }
  static DistributionSpec burr(double alpha, double beta, double nu) {
    detail::require_positive(alpha, "burr alpha");
    detail::require_positive(beta, "burr beta");
    detail::require_positive(nu, "burr nu");
    return DistributionSpec(BurrParams{alpha, beta, nu});
  }

  Family family() const { return static_cast<Family>(params_.index()); }
  const Params& params() const { return params_; }

  template <class P>
  const P& get() const {
    return std::get<P>(params_);
  }

  bool operator==(const DistributionSpec&) const = default;

 private:
  explicit DistributionSpec(Params p) : params_(std::move(p)) {}
  Params params_;
};

/// Generalized gamma in the original (Stacy) form S(t) = 1 - P(k, (t/scale)^power),
/// converted to the Prentice parameters used internally.
inline DistributionSpec gengamma_from_stacy(double scale, double power, double k) {
  detail::require_positive(scale, "stacy scale");
  detail::require_positive(power, "stacy power");
  detail::require_positive(k, "stacy k");
  const double root_k = std::sqrt(k);
  return DistributionSpec::gengamma(std::log(scale) + std::log(k) / power, 1.0 / (power * root_k),
                                    1.0 / root_k);
}

/// Below this |q| the generalized gamma is evaluated through its log-normal limit.
inline constexpr double kGenGammaLognormalThreshold = 1e-6;

/// S(t) and F(t) evaluated together.
inline SurvivalPair survival_pair(const DistributionSpec& spec, double t) {
  if (std::isnan(t) || t < 0.0) throw DomainError("time must be non-negative");
  if (t == 0.0) return {1.0, 0.0};
  if (std::isinf(t)) return {0.0, 1.0};
  struct Visitor {
    double t;
    SurvivalPair operator()(const ExponentialParams& p) const {
      return detail::from_cumulative_hazard(p.rate * t);
    }
    SurvivalPair operator()(const WeibullParams& p) const {
      // exp(beta ln(alpha t)) keeps (alpha t)^beta accurate for small beta.
      const double x = p.beta == 1.0 ? p.alpha * t : std::exp(p.beta * std::log(p.alpha * t));
      return detail::from_cumulative_hazard(x);
    }
    SurvivalPair operator()(const GammaParams& p) const {
      const auto tails = special::incomplete_gamma(p.shape, p.rate * t);
      return {tails.upper, tails.lower};
    }
    SurvivalPair operator()(const GenGammaParams& p) const {
      const double z = (std::log(t) - p.mu) / p.sigma;
      if (std::abs(p.q) < kGenGammaLognormalThreshold) {
        const auto tails = special::normal_tails(z);
        return {tails.upper, tails.lower};
      }
      const double shape = 1.0 / (p.q * p.q);
      const double log_u = std::log(shape) + p.q * z;
      if (log_u > 700.0) return p.q > 0.0 ? SurvivalPair{0.0, 1.0} : SurvivalPair{1.0, 0.0};
      const auto tails = special::incomplete_gamma(shape, std::exp(log_u));
      // q < 0 mirrors the q > 0 case: u decreases in t, so S = P(gamma, u).
      if (p.q > 0.0) return {tails.upper, tails.lower};
      return {tails.lower, tails.upper};
    }
    SurvivalPair operator()(const BurrParams& p) const {
      const double x = std::exp(p.beta * std::log(p.alpha * t));
      return detail::from_cumulative_hazard(p.nu * std::log1p(x));
    }
  };
  return std::visit(Visitor{t}, spec.params());
}

inline double survival(const DistributionSpec& spec, double t) { return survival_pair(spec, t).survival; }
inline double cdf(const DistributionSpec& spec, double t) { return survival_pair(spec, t).cdf; }

/// Probability mass between two time points given their survival pairs
/// (earlier point first). Differences are taken on whichever side is small.
inline double cell_mass(const SurvivalPair& earlier, const SurvivalPair& later) {
  const double mass = later.cdf <= 0.5 ? later.cdf - earlier.cdf : earlier.survival - later.survival;
  return mass > 0.0 ? mass : 0.0;
}

/// Stepsize h, step count N and mass increments of one grid. `increments[j]`
/// is the mass of the cell [j h, (j+1) h), j = 0 .. N-1.
struct DiscretizedGrid {
  double h = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> increments;
};

/// Masses of the N cells covering [0, t], from differences of the distribution
/// function (never from density point values).
inline DiscretizedGrid discretize(const DistributionSpec& spec, double t, std::size_t n_steps) {
  if (n_steps == 0) throw DomainError("discretize: step count must be at least 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("discretize: horizon must be positive");
  DiscretizedGrid grid{t / static_cast<double>(n_steps), n_steps, {}};
  grid.increments.reserve(n_steps);
  SurvivalPair prev{1.0, 0.0};
  for (std::size_t j = 1; j <= n_steps; ++j) {
    const double x = j == n_steps ? t : t * static_cast<double>(j) / static_cast<double>(n_steps);
    const SurvivalPair cur = survival_pair(spec, x);
    grid.increments.push_back(cell_mass(prev, cur));
    prev = cur;
  }
  return grid;
}

/// Exponent p with F(t) ~ c t^p as t -> 0, when the family has one. This is
/// the power that sets the leading first-cell discretization error h^(p+1).
inline std::optional<double> small_time_power(const DistributionSpec& spec) {
  struct Visitor {
    std::optional<double> operator()(const ExponentialParams&) const { return 1.0; }
    std::optional<double> operator()(const WeibullParams& p) const { return p.beta; }
    std::optional<double> operator()(const GammaParams& p) const { return p.shape; }
    std::optional<double> operator()(const GenGammaParams& p) const {
      if (p.q < kGenGammaLognormalThreshold) return std::nullopt;  // faster than any power
      return 1.0 / (p.q * p.sigma);
    }
    std::optional<double> operator()(const BurrParams& p) const { return p.beta; }
  };
  return std::visit(Visitor{}, spec.params());
}

// ---------------------------------------------------------------------------
// Text form

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Exponential: return "exponential";
    case Family::Weibull: return "weibull";
    case Family::Gamma: return "gamma";
    case Family::GenGamma: return "gengamma";
    case Family::BurrXII: return "burr";
  }
  return "unknown";
}

inline std::string to_string(const DistributionSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  struct Visitor {
    std::ostringstream& os;
    void operator()(const ExponentialParams& p) const { os << "exponential(rate=" << p.rate << ")"; }
    void operator()(const WeibullParams& p) const {
      os << "weibull(alpha=" << p.alpha << ",beta=" << p.beta << ")";
    }
    void operator()(const GammaParams& p) const {
      os << "gamma(shape=" << p.shape << ",rate=" << p.rate << ")";
    }
    void operator()(const GenGammaParams& p) const {
      os << "gengamma(mu=" << p.mu << ",sigma=" << p.sigma << ",q=" << p.q << ")";
    }
    void operator()(const BurrParams& p) const {
      os << "burr(alpha=" << p.alpha << ",beta=" << p.beta << ",nu=" << p.nu << ")";
    }
  };
  std::visit(Visitor{os}, spec.params());
  return os.str();
}

namespace detail {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  DistributionSpec parse() {
    skip_space();
    const std::size_t name_pos = pos_;
    std::string name = identifier();
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name.empty()) fail("expected a distribution family name", name_pos);
    expect('(');
    std::vector<std::pair<std::string, double>> args;
    std::vector<std::size_t> arg_pos;
    skip_space();
    if (peek() != ')') {
      while (true) {
        skip_space();
        arg_pos.push_back(pos_);
        std::string key = identifier();
        if (key.empty()) fail("expected a parameter name", pos_);
        expect('=');
        skip_space();
        const double value = number();
        for (const auto& [k, v] : args) {
          if (k == key) fail("duplicate parameter '" + key + "'", arg_pos.back());
        }
        args.emplace_back(std::move(key), value);
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing characters", pos_);

    auto take = [&](std::initializer_list<std::string_view> keys) -> double {
      for (std::size_t i = 0; i < args.size(); ++i) {
        for (auto key : keys) {
          if (args[i].first == key) {
            const double v = args[i].second;
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            arg_pos.erase(arg_pos.begin() + static_cast<std::ptrdiff_t>(i));
            return v;
          }
        }
      }
      fail("missing parameter '" + std::string(*keys.begin()) + "' for " + name, name_pos);
    };

    std::optional<DistributionSpec> spec;
    if (name == "exponential" || name == "exp") {
      const double rate = take({"rate", "lambda", "alpha"});
      spec = DistributionSpec::exponential(rate);
    } else if (name == "weibull") {
      const double alpha = take({"alpha", "scale"});
      const double beta = take({"beta", "shape"});
      spec = DistributionSpec::weibull(alpha, beta);
    } else if (name == "gamma") {
      const double shape = take({"shape", "k"});
      const double rate = take({"rate", "alpha"});
      spec = DistributionSpec::gamma(shape, rate);
    } else if (name == "gengamma" || name == "generalized_gamma") {
      const double mu = take({"mu"});
      const double sigma = take({"sigma"});
      const double q = take({"q"});
      spec = DistributionSpec::gengamma(mu, sigma, q);
    } else if (name == "burr" || name == "burrxii" || name == "burr12") {
      const double alpha = take({"alpha", "scale"});
      const double beta = take({"beta", "shape"});
      const double nu = take({"nu"});
      spec = DistributionSpec::burr(alpha, beta, nu);
    } else {
      fail("unknown distribution family '" + name + "'", name_pos);
    }
    if (!args.empty()) fail("unknown parameter '" + args.front().first + "' for " + name, arg_pos.front());
    return *spec;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const { throw ParseError(what, at); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+')) {
      ++pos_;
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token.empty()) fail("expected a number", start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + token + "'", start);
    }
    if (used != token.size()) fail("malformed number '" + token + "'", start + used);
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `family(name=value,...)`, e.g. `weibull(alpha=2.64,beta=1.12)`.
/// Throws ParseError with the character offset of the problem; parameter
/// values outside their domain raise ParameterError.
inline DistributionSpec parse_distribution(std::string_view text) { return detail::SpecParser(text).parse(); }

}  // namespace renewal_count
