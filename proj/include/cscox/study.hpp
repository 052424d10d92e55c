#pragma once

// Monte Carlo study harness: simulate, fit, optionally bootstrap, and summarize
// against the scenario's true parameters.

#include "cscox/bootstrap.hpp"
#include "cscox/estimator.hpp"
#include "cscox/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace cscox {

/// sup over the fitted range of |estimated - true| baseline cumulative.
///
/// RightCS: sup over [0, tau] of |Lambda-hat - Lambda0|. LeftCS: sup over
/// [rho, inf) of |R-hat - R0|. Both sides are monotone between jumps, so the
/// sup is attained at a jump time from one side.
inline double sup_baseline_error(const FitResult& fit, const LifetimeLaw& truth) {
  const auto& t = fit.hazard.times();
  const auto& inc = fit.hazard.increments();
  double sup = 0.0;
  if (fit.model == Model::RightCS) {
    double cum = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double f0 = truth.baseline_cumulative(t[k]);
      sup = std::max(sup, std::abs(cum - f0));
      cum += inc[k];
      sup = std::max(sup, std::abs(cum - f0));
    }
    sup = std::max(sup, std::abs(cum - truth.baseline_cumulative(fit.truncation)));
  } else {
    double tail = 0.0;
    for (std::size_t k = t.size(); k-- > 0;) {
      const double r0 = truth.baseline_cumulative(t[k]);
      sup = std::max(sup, std::abs(tail - r0));
      tail += inc[k];
      sup = std::max(sup, std::abs(tail - r0));
    }
    sup = std::max(sup, std::abs(tail - truth.baseline_cumulative(fit.truncation)));
  }
  return sup;
}

struct StudyReplicate {
  Theta theta;
  double sup_error = 0.0;
  bool converged = false;
  bool failed = false;
  std::vector<Interval> beta_ci;  ///< empty unless bootstrapped
  std::vector<double> beta_boot_sd;
};

struct StudyRow {
  std::size_t n = 0;
  std::size_t reps = 0;
  std::size_t failed = 0;
  std::size_t nonconverged = 0;
  double mean_p = 0.0;
  Vector bias;
  Vector sd;
  double mean_norm_error = 0.0;
  double mean_sup_error = 0.0;
  Vector coverage;      ///< empty unless bootstrapped
  Vector mean_boot_sd;  ///< empty unless bootstrapped
};

struct StudyOptions {
  std::size_t reps = 200;
  std::size_t bootstrap_replicates = 0;
  double level = 0.95;
  unsigned threads = 0;
  FitConfig config;
};

/// Replicate `r` of the scenario at sample size `n`; stream (n, r) of the scenario seed.
inline StudyReplicate study_replicate(const ScenarioSpec& spec, std::size_t n, std::size_t r,
                                      const StudyOptions& opts) {
  ScenarioSpec s = spec;
  s.n = n;
  StudyReplicate out;
  try {
    const Dataset ds = simulate(s, (static_cast<std::uint64_t>(n) << 32) | r);
    const FitResult f = fit(ds, opts.config);
    out.theta = f.theta_hat;
    out.converged = f.converged;
    out.sup_error = sup_baseline_error(f, LifetimeLaw(s));
    if (opts.bootstrap_replicates > 0) {
      BootstrapOptions bo;
      bo.replicates = opts.bootstrap_replicates;
      bo.seed = spec.seed ^ (0x9e3779b97f4a7c15ULL * (r + 1)) ^ n;
      bo.threads = 1;
      const MultiplierDraws draws = bootstrap(ds, opts.config, f, bo);
      const ConfidenceIntervals ci = confidence_intervals(draws, opts.level);
      out.beta_ci = ci.beta;
      for (Eigen::Index j = 0; j < f.theta_hat.beta.size(); ++j) {
        double m = 0.0, m2 = 0.0, k = 0.0;
        for (const auto& rep : draws.replicates) {
          if (rep.failed) continue;
          m += rep.theta.beta[j];
          m2 += rep.theta.beta[j] * rep.theta.beta[j];
          k += 1.0;
        }
        m /= k;
        out.beta_boot_sd.push_back(std::sqrt(std::max(0.0, (m2 - k * m * m) / (k - 1.0))));
      }
    }
  } catch (const Error&) {
    out.failed = true;
  }
  return out;
}

/// Aggregates replicates in index order.
inline StudyRow summarize(const ScenarioSpec& spec, std::size_t n, const std::vector<StudyReplicate>& reps) {
  const Eigen::Index q = spec.beta0.size();
  StudyRow row;
  row.n = n;
  row.reps = reps.size();
  row.bias = Vector::Zero(q);
  row.sd = Vector::Zero(q);
  Vector second = Vector::Zero(q);
  const bool boot = !reps.empty() && std::any_of(reps.begin(), reps.end(), [](const auto& r) { return !r.beta_ci.empty(); });
  if (boot) {
    row.coverage = Vector::Zero(q);
    row.mean_boot_sd = Vector::Zero(q);
  }
  double used = 0.0;
  for (const auto& r : reps) {
    if (r.failed) {
      ++row.failed;
      continue;
    }
    if (!r.converged) ++row.nonconverged;
    used += 1.0;
    row.mean_p += r.theta.p;
    const Vector err = r.theta.beta - spec.beta0;
    row.bias += err;
    second += err.cwiseProduct(err);
    row.mean_norm_error += err.norm();
    row.mean_sup_error += r.sup_error;
    if (boot) {
      for (Eigen::Index j = 0; j < q; ++j) {
        const auto& iv = r.beta_ci[static_cast<std::size_t>(j)];
        if (iv.lower <= spec.beta0[j] && spec.beta0[j] <= iv.upper) row.coverage[j] += 1.0;
        row.mean_boot_sd[j] += r.beta_boot_sd[static_cast<std::size_t>(j)];
      }
    }
  }
  if (used > 0.0) {
    row.mean_p /= used;
    row.bias /= used;
    row.mean_norm_error /= used;
    row.mean_sup_error /= used;
    const double denom = used > 1.0 ? used - 1.0 : 1.0;
    row.sd = ((second - used * row.bias.cwiseProduct(row.bias)) / denom).cwiseMax(0.0).cwiseSqrt();
    if (boot) {
      row.coverage /= used;
      row.mean_boot_sd /= used;
    }
  }
  return row;
}

/// Runs `opts.reps` replicates at each n, in parallel over replicates.
inline std::vector<StudyRow> run_study(const ScenarioSpec& spec, const std::vector<std::size_t>& grid,
                                       const StudyOptions& opts, std::vector<std::vector<StudyReplicate>>* raw = nullptr) {
  std::vector<StudyRow> rows;
  for (std::size_t n : grid) {
    std::vector<StudyReplicate> reps(opts.reps);
    parallel_for(opts.reps, worker_count(opts.threads), [&](std::size_t r) { reps[r] = study_replicate(spec, n, r, opts); });
    rows.push_back(summarize(spec, n, reps));
    if (raw) raw->push_back(std::move(reps));
  }
  return rows;
}

}  // namespace cscox
