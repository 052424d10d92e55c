#pragma once

// Fit pipeline: p-hat, beta-hat by maximizing the approximate profile
// log-likelihood, the baseline (reverse) hazard at the estimate, and the
// conditional lifetime curves derived from it.

#include "cscox/core.hpp"
#include "cscox/empirical.hpp"
#include "cscox/likelihood.hpp"
#include "cscox/optimizer.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cscox {

struct FitResult {
  Model model = Model::RightCS;
  Theta theta_hat;
  StepFunction hazard;  ///< Lambda-hat jumps (RightCS) or R_n increments (LeftCS)
  double truncation = 0.0;
  double loglik_at_max = 0.0;
  double score_norm_at_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t dropped_terms = 0;
  std::size_t n = 0;
  std::vector<Warning> warnings;

  /// Cumulative baseline at t: Lambda-hat(t), or R-hat(t) = sum of increments beyond t.
  double cumulative(double t) const { return model == Model::RightCS ? hazard(t) : hazard.tail(t); }
};

struct ConditionalCurve {
  Vector z;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<Warning> warnings;
};

namespace detail {

inline FitResult fit_impl(const Dataset& ds, const FitConfig& config, const Vector* first_start) {
  FitResult out;
  out.model = ds.model();
  out.n = ds.size();
  out.warnings = ds.warnings();
  const std::size_t q = ds.dim();

  const double p = estimate_p(ds, config.p_floor, &out.warnings);
  const double bound = resolve_truncation(ds, config);
  out.truncation = bound;

  const Vector lo = config.lower_bounds(q);
  const Vector hi = config.upper_bounds(q);
  if (lo.size() != static_cast<Eigen::Index>(q) || hi.size() != static_cast<Eigen::Index>(q) ||
      (lo.array() > hi.array()).any()) {
    throw Error(ErrorKind::InvalidArgument, "beta box does not match the covariate dimension");
  }

  // The criterion is invariant to covariate translation; centering only helps conditioning.
  const Dataset centered = ds.centered();
  auto objective = [&](const Vector& b) {
    ScoreReport r = evaluate(centered, p, b, bound, true);
    return std::pair<double, Vector>{r.value, std::move(r.gradient)};
  };

  OptimizerOptions opt;
  opt.grad_tol = config.grad_tol;
  opt.step_tol = config.step_tol;
  opt.max_iter = config.max_iter;

  std::vector<Vector> starts;
  starts.push_back(first_start ? detail::project(*first_start, lo, hi) : Vector::Zero(static_cast<Eigen::Index>(q)));
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < config.random_starts; ++s) {
    Vector b(static_cast<Eigen::Index>(q));
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = lo[j] + (hi[j] - lo[j]) * unif(rng);
    starts.push_back(std::move(b));
  }

  OptimizerResult best;
  bool have_best = false;
  int total_iterations = 0;
  std::string last_error;
  for (const Vector& start : starts) {
    try {
      OptimizerResult r = maximize_in_box(objective, start, lo, hi, opt);
      total_iterations += r.iterations;
      // later starts must beat the incumbent by more than rounding noise
      if (!have_best || r.value > best.value + 1e-12 * (1.0 + std::abs(best.value))) {
        best = std::move(r);
        have_best = true;
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!have_best) throw Error(ErrorKind::ZeroRiskSet, "every optimizer start failed: " + last_error);

  // A vanishing gradient far out can be an asymptote rather than a maximum:
  // push each coordinate to the edge its gradient points at and keep it there if nothing is lost.
  for (Eigen::Index j = 0; j < best.x.size(); ++j) {
    if (best.gradient[j] == 0.0) continue;
    Vector edge = best.x;
    edge[j] = best.gradient[j] > 0.0 ? hi[j] : lo[j];
    if (edge[j] == best.x[j]) continue;
    try {
      const double floor = best.value - 8 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(best.value));
      if (objective(edge).first < floor) continue;
      OptimizerResult r = maximize_in_box(objective, edge, lo, hi, opt);
      total_iterations += r.iterations;
      if (r.value >= floor) best = std::move(r);
    } catch (const Error&) {
    }
  }

  out.theta_hat = Theta{p, best.x};
  out.iterations = total_iterations;
  out.converged = best.converged;

  const ScoreReport at_max = evaluate(ds, p, best.x, bound, true);
  out.loglik_at_max = at_max.value;
  out.score_norm_at_max = at_max.gradient.norm();
  out.dropped_terms = at_max.dropped_terms;
  if (at_max.dropped_terms > 0) {
    out.warnings.push_back({"DroppedCurrentStatusTerms",
                            std::to_string(at_max.dropped_terms) +
                                " current-status records precede every event time and were left out"});
  }
  if (best.at_boundary) {
    out.warnings.push_back({"AtBoundary", "beta-hat lies on the boundary of the parameter box"});
  }
  if (!best.converged) {
    out.warnings.push_back({"NonConvergence", best.message});
  }
  out.hazard = baseline_hazard(ds, out.theta_hat, bound);
  return out;
}

}  // namespace detail

/// Fits the dataset's model: p-hat, then beta-hat over the box by multi-start
/// projected BFGS (beta = 0 plus `config.random_starts` uniform box points).
inline FitResult fit(const Dataset& ds, const FitConfig& config = {}) {
  return detail::fit_impl(ds, config, nullptr);
}

/// Same as `fit`, with the deterministic start placed at `start` instead of 0.
inline FitResult fit_from(const Dataset& ds, const FitConfig& config, const Vector& start) {
  return detail::fit_impl(ds, config, &start);
}

/// S-hat_T(t | z): product over hazard jumps s <= t of (1 - exp(beta'z) dLambda(s)).
/// Negative factors are clamped at 0 and reported as CurveClamped.
inline ConditionalCurve survival_curve(const FitResult& fit, const Vector& z, std::vector<double> times) {
  if (fit.model != Model::RightCS) throw Error(ErrorKind::InvalidArgument, "survival curves need a right-cs fit");
  if (z.size() != fit.theta_hat.beta.size()) throw Error(ErrorKind::InconsistentCovariateDim, "z has wrong dimension");
  const double risk = std::exp(fit.theta_hat.beta.dot(z));
  const auto& jt = fit.hazard.times();
  const auto& ji = fit.hazard.increments();

  ConditionalCurve curve;
  curve.z = z;
  std::vector<double> prefix(jt.size() + 1, 1.0);
  for (std::size_t k = 0; k < jt.size(); ++k) {
    double factor = 1.0 - risk * ji[k];
    if (factor < 0.0) {
      curve.warnings.push_back({"CurveClamped", "negative product-integral factor at t = " + std::to_string(jt[k])});
      factor = 0.0;
    }
    prefix[k + 1] = prefix[k] * factor;
  }
  curve.values.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0 && t <= fit.truncation)) {
      throw Error(ErrorKind::InvalidArgument, "survival curve time outside [0, tau]: " + std::to_string(t));
    }
    const auto k = static_cast<std::size_t>(std::upper_bound(jt.begin(), jt.end(), t) - jt.begin());
    curve.values.push_back(prefix[k]);
  }
  curve.times = std::move(times);
  return curve;
}

/// S-hat_T(tau | z), the estimated probability of never failing.
inline double cure_rate(const FitResult& fit, const Vector& z) {
  return survival_curve(fit, z, {fit.truncation}).values.front();
}

/// F-hat_T(t | z): product over reverse-hazard jumps s > t of (1 - exp(beta'z) dR(s)).
inline ConditionalCurve distribution_curve(const FitResult& fit, const Vector& z, std::vector<double> times) {
  if (fit.model != Model::LeftCS) throw Error(ErrorKind::InvalidArgument, "distribution curves need a left-cs fit");
  if (z.size() != fit.theta_hat.beta.size()) throw Error(ErrorKind::InconsistentCovariateDim, "z has wrong dimension");
  const double risk = std::exp(fit.theta_hat.beta.dot(z));
  const auto& jt = fit.hazard.times();
  const auto& ji = fit.hazard.increments();

  ConditionalCurve curve;
  curve.z = z;
  std::vector<double> suffix(jt.size() + 1, 1.0);
  for (std::size_t k = jt.size(); k-- > 0;) {
    double factor = 1.0 - risk * ji[k];
    if (factor < 0.0) {
      curve.warnings.push_back({"CurveClamped", "negative product-integral factor at t = " + std::to_string(jt[k])});
      factor = 0.0;
    }
    suffix[k] = suffix[k + 1] * factor;
  }
  curve.values.reserve(times.size());
  for (double t : times) {
    if (!(t >= fit.truncation) || !std::isfinite(t)) {
      throw Error(ErrorKind::InvalidArgument, "distribution curve time below rho: " + std::to_string(t));
    }
    const auto k = static_cast<std::size_t>(std::upper_bound(jt.begin(), jt.end(), t) - jt.begin());
    curve.values.push_back(suffix[k]);
  }
  curve.times = std::move(times);
  return curve;
}

/// F-hat_T(rho | z), the estimated probability of a zero lifetime.
inline double zero_prob(const FitResult& fit, const Vector& z) {
  return distribution_curve(fit, z, {fit.truncation}).values.front();
}

/// Survival curve (RightCS) or distribution curve (LeftCS).
inline ConditionalCurve lifetime_curve(const FitResult& fit, const Vector& z, std::vector<double> times) {
  return fit.model == Model::RightCS ? survival_curve(fit, z, std::move(times))
                                     : distribution_curve(fit, z, std::move(times));
}

}  // namespace cscox
