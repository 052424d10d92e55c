#pragma once

// Multiplier bootstrap by weighted refitting: each replicate draws i.i.d.
// positive weights, normalizes them to mean one and reruns the whole
// estimating pipeline on the weighted empirical measure.

#include "cscox/core.hpp"
#include "cscox/estimator.hpp"
#include "cscox/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace cscox {

enum class WeightLaw {
  Exponential,  ///< xi ~ Exp(1)
  Gaussian,     ///< 1 + (xi - mean(xi)), xi ~ N(0,1), floored at 0
  Unit          ///< all weights 1; test hook
};

inline const char* weight_law_name(WeightLaw law) {
  switch (law) {
    case WeightLaw::Exponential: return "exponential";
    case WeightLaw::Gaussian: return "gaussian";
    case WeightLaw::Unit: return "unit";
  }
  return "unknown";
}

struct BootstrapOptions {
  std::size_t replicates = 0;
  std::uint64_t seed = 1;
  WeightLaw law = WeightLaw::Exponential;
  std::vector<Vector> curve_z;  ///< covariate values for which replicate curves are kept
  unsigned threads = 0;         ///< 0: CSCOX_THREADS or the hardware concurrency
};

struct Replicate {
  Theta theta;
  std::vector<double> hazard;               ///< cumulative baseline on the shared grid
  std::vector<std::vector<double>> curves;  ///< one per curve_z, on the shared grid
  bool failed = false;
  std::string message;
};

struct MultiplierDraws {
  std::uint64_t seed = 0;
  std::size_t replicate_count = 0;
  WeightLaw law = WeightLaw::Exponential;
  double truncation = 0.0;
  std::vector<double> grid;  ///< jump times of the base fit's hazard
  std::vector<Vector> curve_z;
  std::vector<Replicate> replicates;
  std::size_t failures = 0;
  std::vector<Warning> warnings;
};

/// Number of worker threads: explicit request, else CSCOX_THREADS, else hardware.
inline unsigned worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CSCOX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `task(i)` for i in [0, count) on a small pool; results must be stored by index.
template <class Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Multiplier weights with sample mean exactly one.
inline Vector draw_weights(std::size_t n, WeightLaw law, std::mt19937_64& rng, std::vector<Warning>* warnings = nullptr) {
  const auto m = static_cast<Eigen::Index>(n);
  Vector w(m);
  switch (law) {
    case WeightLaw::Unit:
      return Vector::Ones(m);
    case WeightLaw::Exponential:
      for (Eigen::Index i = 0; i < m; ++i) w[i] = -std::log(detail::unit_open(rng));
      break;
    case WeightLaw::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < m; ++i) w[i] = normal(rng);
      w = (w.array() - w.mean() + 1.0).matrix();
      if ((w.array() < 0.0).any()) {
        w = w.cwiseMax(0.0);
        if (warnings) warnings->push_back({"NegativeWeightsFloored", "negative gaussian weights set to 0"});
      }
      break;
    }
  }
  return w / w.mean();
}

/// Weighted-refit bootstrap around an existing base fit.
///
/// Every replicate shares the base fit's truncation point and evaluates its
/// baseline on the base fit's jump times. Replicate b uses stream b of `seed`.
inline MultiplierDraws bootstrap(const Dataset& ds, const FitConfig& config, const FitResult& base,
                                 const BootstrapOptions& opts) {
  MultiplierDraws out;
  out.seed = opts.seed;
  out.replicate_count = opts.replicates;
  out.law = opts.law;
  out.truncation = base.truncation;
  out.grid = base.hazard.times();
  out.curve_z = opts.curve_z;
  out.replicates.resize(opts.replicates);

  FitConfig rep_config = config;
  if (ds.model() == Model::RightCS) rep_config.tau = base.truncation;
  else rep_config.rho = base.truncation;

  std::vector<std::vector<Warning>> rep_warnings(opts.replicates);
  parallel_for(opts.replicates, worker_count(opts.threads), [&](std::size_t b) {
    auto rng = stream_rng(opts.seed, b);
    Replicate& rep = out.replicates[b];
    try {
      const Vector w = draw_weights(ds.size(), opts.law, rng, &rep_warnings[b]);
      FitConfig cfg = rep_config;
      cfg.seed = rng();
      const FitResult f = fit_from(ds.with_weights(w), cfg, base.theta_hat.beta);
      rep.theta = f.theta_hat;
      rep.hazard.reserve(out.grid.size());
      for (double t : out.grid) rep.hazard.push_back(f.cumulative(t));
      for (const Vector& z : opts.curve_z) rep.curves.push_back(lifetime_curve(f, z, out.grid).values);
      if (!f.converged) {
        rep.failed = true;
        rep.message = "NonConvergence";
      }
    } catch (const Error& e) {
      rep.failed = true;
      rep.message = e.what();
    }
  });

  for (std::size_t b = 0; b < opts.replicates; ++b) {
    if (out.replicates[b].failed) ++out.failures;
    for (auto& w : rep_warnings[b]) {
      if (!has_warning(out.warnings, w.code)) out.warnings.push_back(w);
    }
  }
  if (opts.replicates > 0 && static_cast<double>(out.failures) > 0.2 * static_cast<double>(opts.replicates)) {
    throw Error(ErrorKind::BootstrapDegenerate, std::to_string(out.failures) + " of " +
                                                    std::to_string(opts.replicates) + " replicates failed");
  }
  return out;
}

/// Fits the data first, then bootstraps around that fit.
inline MultiplierDraws bootstrap(const Dataset& ds, const FitConfig& config, const BootstrapOptions& opts) {
  return bootstrap(ds, config, fit(ds, config), opts);
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Linear-interpolation sample quantile (order statistics x_(1..m), h = (m-1) prob).
inline double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw Error(ErrorKind::InsufficientReplicates, "no values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Symmetric percentile interval [q(alpha/2), q(1 - alpha/2)].
inline Interval percentile_interval(const std::vector<double>& values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  return Interval{sample_quantile(values, alpha / 2.0), sample_quantile(values, 1.0 - alpha / 2.0)};
}

struct ConfidenceIntervals {
  double level = 0.95;
  std::size_t used = 0;
  Interval p;
  std::vector<Interval> beta;
  std::vector<Interval> hazard;               ///< per grid point
  std::vector<std::vector<Interval>> curves;  ///< per curve_z, per grid point
};

/// Percentile intervals from the non-failed replicates; needs at least 50 of them.
inline ConfidenceIntervals confidence_intervals(const MultiplierDraws& draws, double level) {
  std::vector<const Replicate*> ok;
  for (const auto& r : draws.replicates) if (!r.failed) ok.push_back(&r);
  if (ok.size() < 50) {
    throw Error(ErrorKind::InsufficientReplicates,
                "percentile intervals need at least 50 usable replicates, got " + std::to_string(ok.size()));
  }
  ConfidenceIntervals ci;
  ci.level = level;
  ci.used = ok.size();
  auto collect = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(ok.size());
    for (const Replicate* r : ok) v.push_back(get(*r));
    return percentile_interval(v, level);
  };
  ci.p = collect([](const Replicate& r) { return r.theta.p; });
  const Eigen::Index q = ok.front()->theta.beta.size();
  for (Eigen::Index j = 0; j < q; ++j) ci.beta.push_back(collect([j](const Replicate& r) { return r.theta.beta[j]; }));
  for (std::size_t k = 0; k < draws.grid.size(); ++k) {
    ci.hazard.push_back(collect([k](const Replicate& r) { return r.hazard[k]; }));
  }
  for (std::size_t c = 0; c < draws.curve_z.size(); ++c) {
    std::vector<Interval> band;
    for (std::size_t k = 0; k < draws.grid.size(); ++k) {
      band.push_back(collect([c, k](const Replicate& r) { return r.curves[c][k]; }));
    }
    ci.curves.push_back(std::move(band));
  }
  return ci;
}

}  // namespace cscox
