#pragma once

// Unconstrained maximization: a Nelder-Mead simplex to get near the optimum,
// then BFGS with central-difference gradients to finish. Objectives may
// return -inf to reject a point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace renewal_count::optimize {

using Vector = Eigen::VectorXd;
using Objective = std::function<double(const Vector&)>;

struct Config {
  int simplex_iterations = 2000;
  double simplex_step = 0.1;        // initial simplex edge in each coordinate
  double simplex_tolerance = 1e-8;  // spread of objective values over the simplex
  int bfgs_iterations = 200;
  double gradient_step = 1e-5;
  double gradient_tolerance = 1e-5;
  double value_tolerance = 1e-8;  // change of the objective per BFGS step
};

struct Result {
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int simplex_iterations = 0;
  int bfgs_iterations = 0;
  int evaluations = 0;
};

namespace detail {

inline bool usable(double v) { return !std::isnan(v) && v > -std::numeric_limits<double>::infinity(); }

}  // namespace detail

/// Central-difference gradient.
inline Vector gradient(const Objective& f, const Vector& x, double step) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian.
inline Eigen::MatrixXd hessian(const Objective& f, const Vector& x, double step = 1e-4) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd hess(n, n);
  const double f0 = f(x);
  std::vector<double> h(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] = step * std::max(1.0, std::abs(x[i]));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = h[static_cast<std::size_t>(i)];
    Vector a = x, b = x;
    a[i] += hi;
    b[i] -= hi;
    hess(i, i) = (f(a) - 2.0 * f0 + f(b)) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = h[static_cast<std::size_t>(j)];
      Vector pp = x, pm = x, mp = x, mm = x;
      pp[i] += hi; pp[j] += hj;
      pm[i] += hi; pm[j] -= hj;
      mp[i] -= hi; mp[j] += hj;
      mm[i] -= hi; mm[j] -= hj;
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hi * hj);
    }
  }
  return hess;
}

/// Nelder-Mead maximization from x0.
inline Result nelder_mead(const Objective& f, const Vector& x0, const Config& cfg) {
  const Eigen::Index n = x0.size();
  Result r;
  auto eval = [&](const Vector& x) {
    ++r.evaluations;
    const double v = f(x);
    return detail::usable(v) ? v : -std::numeric_limits<double>::infinity();
  };
  std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += cfg.simplex_step;
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  for (int it = 0; it < cfg.simplex_iterations; ++it) {
    r.simplex_iterations = it + 1;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (std::isfinite(val[worst]) && val[best] - val[worst] <= cfg.simplex_tolerance * (1.0 + std::abs(val[best]))) {
      r.converged = true;
      break;
    }
    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(n);

    const Vector reflected = centroid + (centroid - pts[worst]);
    const double fr = eval(reflected);
    if (fr > val[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(expanded);
      if (fe > fr) {
        pts[worst] = expanded;
        val[worst] = fe;
      } else {
        pts[worst] = reflected;
        val[worst] = fr;
      }
      continue;
    }
    if (fr > val[second]) {
      pts[worst] = reflected;
      val[worst] = fr;
      continue;
    }
    const bool outside = fr > val[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(contracted);
    if (fc > (outside ? fr : val[worst])) {
      pts[worst] = contracted;
      val[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      val[i] = eval(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::max_element(val.begin(), val.end()) - val.begin());
  r.x = pts[best];
  r.value = val[best];
  return r;
}

/// BFGS maximization from x0 with backtracking line search.
inline Result bfgs(const Objective& f, const Vector& x0, const Config& cfg) {
  const Eigen::Index n = x0.size();
  Result r;
  auto eval = [&](const Vector& x) {
    ++r.evaluations;
    const double v = f(x);
    return detail::usable(v) ? v : -std::numeric_limits<double>::infinity();
  };
  Vector x = x0;
  double fx = eval(x);
  r.evaluations += static_cast<int>(2 * n);
  Vector g = gradient(f, x, cfg.gradient_step);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);  // inverse of the negated Hessian

  for (int it = 0; it < cfg.bfgs_iterations; ++it) {
    r.bfgs_iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) {
      r.converged = true;
      break;
    }
    Vector dir = inv * g;
    if (dir.dot(g) <= 0.0) {
      inv.setIdentity();
      dir = g;
    }
    double step = 1.0, f_new = -std::numeric_limits<double>::infinity();
    Vector x_new;
    for (int k = 0; k < 40; ++k) {
      x_new = x + step * dir;
      f_new = eval(x_new);
      if (f_new >= fx + 1e-4 * step * g.dot(dir)) break;
      step *= 0.5;
    }
    if (!(f_new > fx)) {
      // no ascent along a usable direction: at the optimum to gradient accuracy
      r.converged = g.lpNorm<Eigen::Infinity>() < 1e3 * cfg.gradient_tolerance;
      break;
    }
    const Vector g_new = gradient(f, x_new, cfg.gradient_step);
    r.evaluations += static_cast<int>(2 * n);
    const Vector s = x_new - x;
    const Vector y = g - g_new;  // gradient decrease, positive curvature for a maximum
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      inv = (id - rho * s * y.transpose()) * inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double change = f_new - fx;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (change < cfg.value_tolerance && g.lpNorm<Eigen::Infinity>() < 1e2 * cfg.gradient_tolerance) {
      r.converged = true;
      break;
    }
  }
  r.x = x;
  r.value = fx;
  return r;
}

/// Simplex followed by BFGS.
inline Result maximize(const Objective& f, const Vector& x0, const Config& cfg = {}) {
  const Result nm = nelder_mead(f, x0, cfg);
  Result qn = bfgs(f, nm.x, cfg);
  qn.simplex_iterations = nm.simplex_iterations;
  qn.evaluations += nm.evaluations;
  if (nm.value > qn.value) {
    qn.x = nm.x;
    qn.value = nm.value;
  }
  return qn;
}

}  // namespace renewal_count::optimize
