#pragma once

// Closed-form estimate of p, the approximate profile log-likelihoods of both
// models with their analytical scores, and the Kim-type full likelihood used
// as a diagnostic.

#include "cscox/core.hpp"
#include "cscox/empirical.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace cscox {

/// Value, gradient in beta and bookkeeping of one criterion evaluation.
struct ScoreReport {
  double value = 0.0;
  Vector gradient;                            ///< empty when not requested
  std::array<double, 3> terms{0.0, 0.0, 0.0}; ///< event, current-status, compensator
  std::size_t event_terms = 0;                ///< active D_0 records
  std::size_t current_status_terms = 0;       ///< active D_2 (right) / D_1 (left) records
  std::size_t dropped_terms = 0;              ///< current-status records with empty inner integral
};

/// log(1 - exp(-v)) for v > 0 without cancellation.
inline double log1mexp(double v) {
  return v < M_LN2 ? std::log(-std::expm1(-v)) : std::log1p(-std::exp(-v));
}

/// Weighted p-hat: #{A=0} / #{A != 1} (RightCS) or #{A=0} / #{A != 2} (LeftCS),
/// floored at `p_floor`. A clamp is reported through `warnings` when given.
inline double estimate_p(const Dataset& ds, double p_floor = 1e-3, std::vector<Warning>* warnings = nullptr) {
  const int excluded = ds.model() == Model::RightCS ? 1 : 2;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int a = ds.status(i);
    if (a == 0) num += ds.weight(i);
    if (a != excluded) den += ds.weight(i);
  }
  if (!(den > 0.0)) throw Error(ErrorKind::NoUncensoredEvents, "p-hat denominator is zero");
  const double p = num / den;
  if (p < p_floor) {
    if (warnings) {
      warnings->push_back({"PClamped", "p-hat " + std::to_string(p) + " raised to floor " + std::to_string(p_floor)});
    }
    return p_floor;
  }
  return p;
}

namespace detail {

inline ScoreReport evaluate_on_axis(const Dataset& ds, double p, const Vector& beta, double bound, Axis axis,
                                    bool with_gradient) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in (0, 1]");
  const EventTable tab = build_event_table(ds, p, beta, bound, axis, with_gradient);
  const std::size_t n = ds.size();
  const std::size_t m = tab.size();
  const Eigen::Index q = static_cast<Eigen::Index>(ds.dim());
  const double inv_n = 1.0 / static_cast<double>(n);

  ScoreReport rep;
  Vector grad = Vector::Zero(q);

  // Event and compensator terms, one entry per distinct event time.
  std::vector<double> cum_hazard(m);
  Matrix cum_first(with_gradient ? q : 0, with_gradient ? static_cast<Eigen::Index>(m) : 0);
  double running = 0.0;
  Vector running_first = Vector::Zero(q);
  for (std::size_t j = 0; j < m; ++j) {
    const double e0 = tab.e0p[j];
    rep.terms[0] += tab.linpred[j] - tab.dN[j] * (std::log(e0) + tab.shift);
    rep.terms[2] -= tab.dN[j] * tab.e01[j] / e0;
    running += tab.dN[j] / e0;
    cum_hazard[j] = running;
    if (with_gradient) {
      const auto jj = static_cast<Eigen::Index>(j);
      grad += tab.zsum.col(jj) - tab.dN[j] * tab.e1p.col(jj) / e0;
      grad -= tab.dN[j] * (tab.e11.col(jj) * e0 - tab.e1p.col(jj) * tab.e01[j]) / (e0 * e0);
      running_first += tab.dN[j] * tab.e1p.col(jj) / (e0 * e0);
      cum_first.col(jj) = running_first;
    }
  }

  // Current-status terms: V_i = exp(beta'Z_i) * integral of N(ds)/E(s) over events at or before X_i.
  std::size_t g = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = axis.natural(k, n);
    const double xi = ds.x(i);
    while (g < m && axis.at_or_before(tab.time[g], xi)) ++g;
    const int a = ds.status(i);
    if (a == 0 && ds.weight(i) > 0.0 && axis.at_or_before(xi, bound)) ++rep.event_terms;
    if (a != axis.current || !(ds.weight(i) > 0.0) || !axis.at_or_before(xi, bound)) continue;
    const double factor = std::exp(tab.eta[static_cast<Eigen::Index>(i)] - tab.shift);
    const double v = g == 0 ? 0.0 : factor * cum_hazard[g - 1];
    if (!(v > 0.0)) {
      ++rep.dropped_terms;
      continue;
    }
    ++rep.current_status_terms;
    const double wi = ds.weight(i) * inv_n;
    rep.terms[1] += wi * log1mexp(v);
    if (with_gradient) {
      const double odds = 1.0 / std::expm1(v);
      if (!std::isfinite(odds)) {
        throw Error(ErrorKind::NumericOverflow, "1 - exp(-V) underflows at x = " + std::to_string(xi));
      }
      const Vector w_i = factor * (ds.z(i).transpose() * cum_hazard[g - 1] -
                                   cum_first.col(static_cast<Eigen::Index>(g - 1)));
      grad += wi * odds * w_i;
    }
  }

  rep.value = rep.terms[0] + rep.terms[1] + rep.terms[2];
  if (with_gradient) rep.gradient = std::move(grad);
  return rep;
}

}  // namespace detail

/// Right-censoring/current-status criterion l_n(p, beta; tau) with its score.
inline ScoreReport evaluate_right(const Dataset& ds, double p, const Vector& beta, double tau,
                                  bool with_gradient = true) {
  return detail::evaluate_on_axis(ds, p, beta, tau, detail::Axis::of(Model::RightCS), with_gradient);
}

/// Left-censoring/current-status criterion l_n(p, beta; rho) with its score.
inline ScoreReport evaluate_left(const Dataset& ds, double p, const Vector& beta, double rho,
                                 bool with_gradient = true) {
  return detail::evaluate_on_axis(ds, p, beta, rho, detail::Axis::of(Model::LeftCS), with_gradient);
}

/// Dispatches on the dataset's model tag.
inline ScoreReport evaluate(const Dataset& ds, double p, const Vector& beta, double bound,
                            bool with_gradient = true) {
  return ds.model() == Model::RightCS ? evaluate_right(ds, p, beta, bound, with_gradient)
                                      : evaluate_left(ds, p, beta, bound, with_gradient);
}

inline double loglik_right(const Dataset& ds, double p, const Vector& beta, double tau) {
  return evaluate_right(ds, p, beta, tau, false).value;
}

inline double loglik_left(const Dataset& ds, double p, const Vector& beta, double rho) {
  return evaluate_left(ds, p, beta, rho, false).value;
}

inline Vector score_right(const Dataset& ds, double p, const Vector& beta, double tau) {
  return evaluate_right(ds, p, beta, tau, true).gradient;
}

inline Vector score_left(const Dataset& ds, double p, const Vector& beta, double rho) {
  return evaluate_left(ds, p, beta, rho, true).gradient;
}

/// Log of the Kim-type likelihood L_n(beta, Lambda) for a step-function hazard,
/// lambda(X_i) read as the jump of Lambda at X_i. Never maximized here.
inline double kim_loglik(const Dataset& ds, const Vector& beta, const StepFunction& hazard) {
  if (beta.size() != static_cast<Eigen::Index>(ds.dim())) {
    throw Error(ErrorKind::InconsistentCovariateDim, "beta has wrong dimension");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = ds.weight(i);
    if (w == 0.0) continue;
    const double eta = ds.z(i).dot(beta);
    const double risk = std::exp(eta);
    const double xi = ds.x(i);
    switch (ds.status(i)) {
      case 0: {
        const double jump = hazard.jump_at(xi);
        if (!(jump > 0.0)) {
          throw Error(ErrorKind::MissingJumpAtEvent, "hazard has no jump at event record " + std::to_string(i));
        }
        // integral of 1(X_i > t) Lambda(dt): mass strictly before X_i
        total += w * (eta + std::log(jump) - risk * (hazard(xi) - jump));
        break;
      }
      case 1:
        total -= w * risk * hazard(xi);
        break;
      default: {
        const double v = risk * hazard(xi);
        if (!(v > 0.0)) {
          throw Error(ErrorKind::DegenerateCurrentStatus,
                      "current-status record " + std::to_string(i) + " has zero cumulative hazard");
        }
        total += w * log1mexp(v);
      }
    }
  }
  return total;
}

/// Finite-difference Jacobians of the score, d/dbeta U_n (q x q) and d/dp U_n (q),
/// exposed as a diagnostic.
struct ScoreJacobian {
  Matrix d_beta;
  Vector d_p;
};

inline ScoreJacobian score_jacobian(const Dataset& ds, const Theta& theta, double bound, double h = 1e-6) {
  const Eigen::Index q = theta.beta.size();
  ScoreJacobian out;
  out.d_beta.resize(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    Vector up = theta.beta, dn = theta.beta;
    up[j] += h;
    dn[j] -= h;
    out.d_beta.col(j) = (evaluate(ds, theta.p, up, bound).gradient - evaluate(ds, theta.p, dn, bound).gradient) / (2 * h);
  }
  // p sits in (0, 1]: shift the stencil left when it would leave the interval
  const double p_up = std::min(theta.p + h, 1.0);
  const double p_dn = p_up - 2 * h;
  out.d_p = (evaluate(ds, p_up, theta.beta, bound).gradient - evaluate(ds, p_dn, theta.beta, bound).gradient) /
            (p_up - p_dn);
  return out;
}

}  // namespace cscox
