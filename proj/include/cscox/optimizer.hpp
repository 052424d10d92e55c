#pragma once

// Projected quasi-Newton ascent on a box.

#include "cscox/core.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace cscox {

struct OptimizerOptions {
  double grad_tol = 1e-8;   ///< on the projected gradient, Euclidean norm
  double step_tol = 1e-14;  ///< relative step below which the search has stalled
  int max_iter = 200;
  double max_step = 5.0;    ///< cap on the length of a trial step
};

struct OptimizerResult {
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
  Vector gradient;
  double projected_gradient_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false;
  std::string message;
};

namespace detail {

inline Vector project(Vector x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

// Coordinates held at a bound by an outward-pointing gradient.
inline Eigen::Array<bool, Eigen::Dynamic, 1> active_set(const Vector& x, const Vector& g, const Vector& lo,
                                                         const Vector& hi) {
  return ((x.array() <= lo.array()) && (g.array() < 0.0)) || ((x.array() >= hi.array()) && (g.array() > 0.0));
}

}  // namespace detail

/// Maximizes f over the box [lo, hi].
///
/// `f(x)` returns (value, gradient). Trial points where f throws a cscox::Error
/// are treated as failed line-search steps.
template <class Objective>
OptimizerResult maximize_in_box(Objective&& f, const Vector& x0, const Vector& lo, const Vector& hi,
                                const OptimizerOptions& opt = {}) {
  const Eigen::Index q = x0.size();
  OptimizerResult res;
  Vector x = detail::project(x0, lo, hi);
  auto [v, g] = f(x);
  if (!std::isfinite(v)) throw Error(ErrorKind::NumericOverflow, "objective not finite at the starting point");

  Matrix h = Matrix::Identity(q, q);
  bool fresh = true;
  const double eps = std::numeric_limits<double>::epsilon();

  auto finish = [&](bool converged, std::string message, int iterations) {
    res.x = x;
    res.value = v;
    res.gradient = g;
    Vector pg = g;
    const auto act = detail::active_set(x, g, lo, hi);
    for (Eigen::Index j = 0; j < q; ++j) if (act[j]) pg[j] = 0.0;
    res.projected_gradient_norm = pg.norm();
    res.iterations = iterations;
    res.converged = converged;
    res.at_boundary = ((x.array() <= lo.array()) || (x.array() >= hi.array())).any();
    res.message = std::move(message);
    return res;
  };

  for (int it = 0; it < opt.max_iter; ++it) {
    const auto act = detail::active_set(x, g, lo, hi);
    Vector pg = g;
    for (Eigen::Index j = 0; j < q; ++j) if (act[j]) pg[j] = 0.0;
    if (pg.norm() <= opt.grad_tol) return finish(true, "gradient tolerance reached", it);

    Matrix hf = h;
    for (Eigen::Index j = 0; j < q; ++j) {
      if (act[j]) {
        hf.row(j).setZero();
        hf.col(j).setZero();
      }
    }
    Vector d = hf * pg;
    if (!(d.dot(pg) > 0.0)) {
      h.setIdentity();
      fresh = true;
      d = pg;
    }
    if (fresh) d /= std::max(1.0, pg.norm());
    if (d.norm() > opt.max_step) d *= opt.max_step / d.norm();

    double alpha = 1.0;
    bool accepted = false;
    Vector xn, gn;
    double vn = 0.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      xn = detail::project(x + alpha * d, lo, hi);
      const Vector s = xn - x;
      if (s.norm() <= opt.step_tol * (1.0 + x.norm())) break;
      try {
        std::tie(vn, gn) = f(xn);
      } catch (const Error&) {
        continue;
      }
      if (!std::isfinite(vn)) continue;
      if (vn >= v + 1e-4 * g.dot(s)) {
        accepted = true;
        break;
      }
      // Near the optimum value differences drown in rounding; fall back on the gradient.
      if (vn >= v - 8 * eps * (1.0 + std::abs(v))) {
        Vector pgn = gn;
        const auto actn = detail::active_set(xn, gn, lo, hi);
        for (Eigen::Index j = 0; j < q; ++j) if (actn[j]) pgn[j] = 0.0;
        if (pgn.norm() < pg.norm()) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!fresh) {
        h.setIdentity();
        fresh = true;
        continue;
      }
      return finish(false, "line search failed", it + 1);
    }

    const Vector s = xn - x;
    const Vector y = g - gn;  // gradient change of the minimized function -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double r = 1.0 / sy;
      const Matrix left = Matrix::Identity(q, q) - r * s * y.transpose();
      h = left * h * left.transpose() + r * s * s.transpose();
      fresh = false;
    }
    x = xn;
    v = vn;
    g = gn;
  }
  const auto act = detail::active_set(x, g, lo, hi);
  Vector pg = g;
  for (Eigen::Index j = 0; j < q; ++j) if (act[j]) pg[j] = 0.0;
  const bool ok = pg.norm() <= opt.grad_tol;
  return finish(ok, ok ? "gradient tolerance reached" : "iteration limit reached", opt.max_iter);
}

}  // namespace cscox
