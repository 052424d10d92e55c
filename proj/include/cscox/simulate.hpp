#pragma once

// Exact generators for both latent models and population quantities of a
// scenario computed by numerical quadrature.

#include "cscox/core.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cscox {

/// Continuous law on [0, inf) given by its cumulative hazard.
struct Law {
  enum class Kind { Exponential, Weibull, PiecewiseConstant };

  Kind kind = Kind::Exponential;
  double rate = 1.0;           // Exponential
  double shape = 1.0;          // Weibull
  double scale = 1.0;          // Weibull
  std::vector<double> breaks;  // PiecewiseConstant: rates[k] holds on [breaks[k-1], breaks[k])
  std::vector<double> rates;

  static Law exponential(double rate) {
    Law l;
    l.kind = Kind::Exponential;
    l.rate = rate;
    l.check();
    return l;
  }
  static Law weibull(double shape, double scale) {
    Law l;
    l.kind = Kind::Weibull;
    l.shape = shape;
    l.scale = scale;
    l.check();
    return l;
  }
  static Law piecewise(std::vector<double> breaks, std::vector<double> rates) {
    Law l;
    l.kind = Kind::PiecewiseConstant;
    l.breaks = std::move(breaks);
    l.rates = std::move(rates);
    l.check();
    return l;
  }

  void check() const {
    switch (kind) {
      case Kind::Exponential:
        if (!(rate > 0.0 && std::isfinite(rate))) throw Error(ErrorKind::InvalidArgument, "exponential rate must be > 0");
        break;
      case Kind::Weibull:
        if (!(shape > 0.0 && scale > 0.0 && std::isfinite(shape) && std::isfinite(scale))) {
          throw Error(ErrorKind::InvalidArgument, "weibull shape and scale must be > 0");
        }
        break;
      case Kind::PiecewiseConstant:
        if (rates.size() != breaks.size() + 1) {
          throw Error(ErrorKind::InvalidArgument, "piecewise law needs one more rate than breaks");
        }
        for (std::size_t k = 0; k < breaks.size(); ++k) {
          if (!(breaks[k] > 0.0) || (k > 0 && !(breaks[k] > breaks[k - 1]))) {
            throw Error(ErrorKind::InvalidArgument, "piecewise breaks must be positive and increasing");
          }
        }
        for (double r : rates) {
          if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "piecewise rates must be >= 0");
        }
        if (std::all_of(rates.begin(), rates.end(), [](double r) { return r == 0.0; })) {
          throw Error(ErrorKind::InvalidArgument, "piecewise law has no hazard mass");
        }
        break;
    }
  }

  double hazard(double t) const {
    switch (kind) {
      case Kind::Exponential: return rate;
      case Kind::Weibull: return shape / scale * std::pow(t / scale, shape - 1.0);
      case Kind::PiecewiseConstant: {
        const auto k = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin());
        return rates[k];
      }
    }
    return 0.0;
  }

  double cumulative_hazard(double t) const {
    if (t <= 0.0) return 0.0;
    if (std::isinf(t)) return total_mass();
    switch (kind) {
      case Kind::Exponential: return rate * t;
      case Kind::Weibull: return std::pow(t / scale, shape);
      case Kind::PiecewiseConstant: {
        double h = 0.0, left = 0.0;
        for (std::size_t k = 0; k < rates.size(); ++k) {
          const double right = k < breaks.size() ? breaks[k] : std::numeric_limits<double>::infinity();
          if (t <= right) return h + rates[k] * (t - left);
          h += rates[k] * (right - left);
          left = right;
        }
        return h;
      }
    }
    return 0.0;
  }

  /// Lambda(inf): finite only for a piecewise law whose last rate is 0.
  double total_mass() const {
    if (kind != Kind::PiecewiseConstant || rates.back() > 0.0) return std::numeric_limits<double>::infinity();
    double h = 0.0, left = 0.0;
    for (std::size_t k = 0; k < breaks.size(); ++k) {
      h += rates[k] * (breaks[k] - left);
      left = breaks[k];
    }
    return h;
  }

  /// Smallest t with cumulative_hazard(t) >= h; +inf when h >= total_mass().
  double inverse_cumulative_hazard(double h) const {
    if (h <= 0.0) return 0.0;
    switch (kind) {
      case Kind::Exponential: return h / rate;
      case Kind::Weibull: return scale * std::pow(h, 1.0 / shape);
      case Kind::PiecewiseConstant: {
        double acc = 0.0, left = 0.0;
        for (std::size_t k = 0; k < rates.size(); ++k) {
          const double right = k < breaks.size() ? breaks[k] : std::numeric_limits<double>::infinity();
          const double seg = rates[k] * (right - left);
          if (rates[k] > 0.0 && acc + seg >= h) return left + (h - acc) / rates[k];
          acc += std::isfinite(seg) ? seg : 0.0;
          left = right;
        }
        return std::numeric_limits<double>::infinity();
      }
    }
    return std::numeric_limits<double>::infinity();
  }

  double survival(double t) const { return std::exp(-cumulative_hazard(t)); }
  double cdf(double t) const { return -std::expm1(-cumulative_hazard(t)); }
  double density(double t) const { return t < 0.0 ? 0.0 : hazard(t) * survival(t); }

  std::vector<double> breakpoints() const {
    return kind == Kind::PiecewiseConstant ? breaks : std::vector<double>{};
  }
};

/// Covariate law: independent coordinates, each uniform on [lower, upper] or
/// uniform over a finite set of levels.
struct CovariateLaw {
  enum class Kind { UniformBox, Levels };

  Kind kind = Kind::UniformBox;
  double lower = -1.0;
  double upper = 1.0;
  std::vector<double> levels;

  static CovariateLaw uniform(double lower, double upper) {
    if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) {
      throw Error(ErrorKind::InvalidArgument, "uniform covariate bounds must satisfy lower < upper");
    }
    return CovariateLaw{Kind::UniformBox, lower, upper, {}};
  }
  static CovariateLaw discrete(std::vector<double> levels) {
    if (levels.empty()) throw Error(ErrorKind::InvalidArgument, "covariate levels must be nonempty");
    return CovariateLaw{Kind::Levels, 0.0, 0.0, std::move(levels)};
  }
};

/// Data-generating scenario with known ground truth.
struct ScenarioSpec {
  Model model = Model::RightCS;
  std::size_t n = 500;
  double p0 = 1.0;
  Vector beta0 = Vector::Zero(1);
  Law baseline = Law::exponential(1.0);
  Law censoring = Law::exponential(1.0);
  CovariateLaw covariates = CovariateLaw::uniform(-1.0, 1.0);
  double cure_mass = 0.0;  ///< RightCS: S_T(inf | z = 0)
  double zero_mass = 0.0;  ///< LeftCS: F_T(0 | z = 0)
  std::uint64_t seed = 1;

  void check() const {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "scenario needs n >= 1");
    if (!(p0 > 0.0 && p0 <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p0 must lie in (0, 1]");
    if (beta0.size() < 1 || !beta0.allFinite()) throw Error(ErrorKind::InvalidArgument, "beta0 must be a finite vector");
    if (!(cure_mass >= 0.0 && cure_mass < 1.0)) throw Error(ErrorKind::InvalidArgument, "cure_mass must lie in [0, 1)");
    if (!(zero_mass >= 0.0 && zero_mass < 1.0)) throw Error(ErrorKind::InvalidArgument, "zero_mass must lie in [0, 1)");
    if (model == Model::RightCS && zero_mass > 0.0) throw Error(ErrorKind::InvalidArgument, "zero_mass applies to left-cs");
    if (model == Model::LeftCS && cure_mass > 0.0) throw Error(ErrorKind::InvalidArgument, "cure_mass applies to right-cs");
    baseline.check();
    censoring.check();
  }
};

/// Conditional law of the lifetime T given Z under the scenario.
///
/// RightCS: proportional hazards, Lambda(t | z) = exp(beta0'z) Lambda0(t). With
/// cure_mass > 0 the baseline is rescaled to total mass -log(cure_mass).
/// LeftCS: proportional reverse hazards, F(t | z) = F0(t)^exp(beta0'z) where
/// F0 = zero_mass + (1 - zero_mass) * (baseline law's cdf).
class LifetimeLaw {
 public:
  explicit LifetimeLaw(const ScenarioSpec& spec)
      : model_(spec.model), base_(spec.baseline), beta_(spec.beta0), cure_(spec.cure_mass), zero_(spec.zero_mass) {
    cure_total_ = cure_ > 0.0 ? -std::log(cure_) : 0.0;
    base_total_ = base_.total_mass();
  }

  Model model() const { return model_; }

  double risk(const Vector& z) const { return std::exp(beta_.dot(z)); }

  /// Lambda0(t) (RightCS) or R0(t) = -log F0(t) (LeftCS).
  double baseline_cumulative(double t) const {
    if (model_ == Model::RightCS) return cure_ > 0.0 ? cure_total_ * shape_fraction(t) : base_.cumulative_hazard(t);
    return -std::log(f0(t));
  }

  /// d Lambda0 / dt (RightCS).
  double baseline_rate(double t) const {
    if (cure_ == 0.0) return base_.hazard(t);
    if (std::isfinite(base_total_)) return cure_total_ * base_.hazard(t) / base_total_;
    return cure_total_ * base_.hazard(t) * base_.survival(t);
  }

  double survival(double t, const Vector& z) const { return 1.0 - cdf(t, z); }

  double cdf(double t, const Vector& z) const {
    if (t < 0.0) return 0.0;
    if (model_ == Model::RightCS) return -std::expm1(-risk(z) * baseline_cumulative(t));
    return std::pow(f0(t), risk(z));
  }

  /// Density of the continuous part of T.
  double density(double t, const Vector& z) const {
    if (t <= 0.0) return 0.0;
    const double w = risk(z);
    if (model_ == Model::RightCS) return baseline_rate(t) * w * std::exp(-w * baseline_cumulative(t));
    const double f0_dens = (1.0 - zero_) * base_.density(t);
    const double base = f0(t);
    if (base <= 0.0) return 0.0;  // integrable singularity at the origin when w < 1
    return w * std::pow(base, w - 1.0) * f0_dens;
  }

  /// Inverse-transform draw from a uniform u in (0, 1); may return +inf (cured) or 0.
  double sample(double u, const Vector& z) const {
    const double w = risk(z);
    if (model_ == Model::RightCS) {
      const double target = -std::log(u) / w;  // Lambda0(T) = E / exp(beta'z)
      if (cure_ == 0.0) return base_.inverse_cumulative_hazard(target);
      if (target >= cure_total_) return std::numeric_limits<double>::infinity();
      const double frac = target / cure_total_;
      if (std::isfinite(base_total_)) return base_.inverse_cumulative_hazard(frac * base_total_);
      return base_.inverse_cumulative_hazard(-std::log1p(-frac));
    }
    const double v = std::pow(u, 1.0 / w);  // F0(T) = u^(1/w)
    if (v <= zero_) return 0.0;
    const double frac = (v - zero_) / (1.0 - zero_);
    return base_.inverse_cumulative_hazard(-std::log1p(-frac));
  }

  std::vector<double> breakpoints() const { return base_.breakpoints(); }

 private:
  double shape_fraction(double t) const {
    if (std::isfinite(base_total_)) return base_.cumulative_hazard(t) / base_total_;
    return base_.cdf(t);
  }
  double f0(double t) const { return zero_ + (1.0 - zero_) * base_.cdf(t); }

  Model model_;
  Law base_;
  Vector beta_;
  double cure_ = 0.0;
  double zero_ = 0.0;
  double cure_total_ = 0.0;
  double base_total_ = 0.0;
};

/// One latent draw (T, C, Delta, Z) and the resulting observation.
struct LatentRecord {
  double lifetime = 0.0;
  double censoring = 0.0;
  bool delta = false;
  Observation observed;
};

/// Independent RNG stream `stream` derived from `seed`.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

inline double unit_open(std::mt19937_64& rng) {
  // (0, 1): 53 random bits, offset by half an ulp of the grid
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline Vector draw_covariates(const CovariateLaw& law, Eigen::Index q, std::mt19937_64& rng) {
  Vector z(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    if (law.kind == CovariateLaw::Kind::UniformBox) {
      z[j] = law.lower + (law.upper - law.lower) * unit_open(rng);
    } else {
      const auto k = static_cast<std::size_t>(unit_open(rng) * static_cast<double>(law.levels.size()));
      z[j] = law.levels[std::min(k, law.levels.size() - 1)];
    }
  }
  return z;
}

}  // namespace detail

/// Draws the latent variables and the observed record for each unit.
inline std::vector<LatentRecord> simulate_latent(const ScenarioSpec& spec, std::uint64_t stream = 0) {
  spec.check();
  const LifetimeLaw life(spec);
  auto rng = stream_rng(spec.seed, stream);
  std::vector<LatentRecord> out(spec.n);
  for (auto& rec : out) {
    const Vector z = detail::draw_covariates(spec.covariates, spec.beta0.size(), rng);
    const double t = life.sample(detail::unit_open(rng), z);
    const double c = spec.censoring.inverse_cumulative_hazard(-std::log(detail::unit_open(rng)));
    const bool delta = detail::unit_open(rng) < spec.p0;
    rec.lifetime = t;
    rec.censoring = c;
    rec.delta = delta;
    if (spec.model == Model::RightCS) {
      if (c < t) rec.observed = {c, 1, z};
      else rec.observed = delta ? Observation{t, 0, z} : Observation{c, 2, z};
    } else {
      if (c <= t) rec.observed = delta ? Observation{t, 0, z} : Observation{c, 1, z};
      else rec.observed = {c, 2, z};
    }
  }
  return out;
}

inline Dataset simulate(const ScenarioSpec& spec, std::uint64_t stream = 0) {
  const auto latent = simulate_latent(spec, stream);
  std::vector<Observation> recs;
  recs.reserve(latent.size());
  for (const auto& r : latent) recs.push_back(r.observed);
  return validate(std::move(recs), spec.model);
}

/// RightCS generator: (T,0,Z) if T <= C and Delta = 1, (C,1,Z) if C < T, (C,2,Z) otherwise.
inline Dataset simulate_right(ScenarioSpec spec, std::uint64_t stream = 0) {
  spec.model = Model::RightCS;
  return simulate(spec, stream);
}

/// LeftCS generator: (T,0,Z) if C <= T and Delta = 1, (C,1,Z) if C <= T and Delta = 0, (C,2,Z) if T < C.
inline Dataset simulate_left(ScenarioSpec spec, std::uint64_t stream = 0) {
  spec.model = Model::LeftCS;
  return simulate(spec, stream);
}

// ---------------------------------------------------------------------------
// Population quantities

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
  std::vector<double> x(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double r = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= m; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p2) / k;
      }
      dp = m * (r * p0 - p1) / (r * r - 1.0);
      const double step = p0 / dp;
      r -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = r;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - r * r) * dp * dp);
  }
  return {x, w};
}

/// Nodes and weights representing the covariate law (tensor product over coordinates).
inline std::vector<std::pair<Vector, double>> covariate_nodes(const CovariateLaw& law, Eigen::Index q) {
  std::vector<double> pts, wts;
  if (law.kind == CovariateLaw::Kind::UniformBox) {
    const int m = q <= 2 ? 20 : (q == 3 ? 10 : 6);
    auto [x, w] = gauss_legendre(m);
    for (std::size_t i = 0; i < x.size(); ++i) {
      pts.push_back(law.lower + (law.upper - law.lower) * (x[i] + 1.0) / 2.0);
      wts.push_back(w[i] / 2.0);
    }
  } else {
    pts = law.levels;
    wts.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  }
  std::vector<std::pair<Vector, double>> nodes{{Vector(0), 1.0}};
  for (Eigen::Index j = 0; j < q; ++j) {
    std::vector<std::pair<Vector, double>> next;
    next.reserve(nodes.size() * pts.size());
    for (const auto& [z, w] : nodes) {
      for (std::size_t k = 0; k < pts.size(); ++k) {
        Vector zz(j + 1);
        zz.head(j) = z;
        zz[j] = pts[k];
        next.emplace_back(std::move(zz), w * wts[k]);
      }
    }
    nodes = std::move(next);
  }
  return nodes;
}

/// Double-exponential quadrature over [a, b] (b may be +inf), split at `cuts`.
/// Tolerates integrable endpoint singularities such as Weibull densities at 0.
template <class F>
double integrate(F&& f, double a, double b, std::vector<double> cuts, double abs_tol = 1e-9) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a};
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts) if (c > a && c < b) pts.push_back(c);
  pts.push_back(b);
  double total = 0.0, err_total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double err = 0.0;
    if (std::isinf(pts[k + 1])) {
      const double lo = pts[k];
      boost::math::quadrature::exp_sinh<double> rule;
      total += rule.integrate([&](double u) { return f(lo + u); }, 1e-12, &err);
    } else {
      boost::math::quadrature::tanh_sinh<double> rule;
      total += rule.integrate(f, pts[k], pts[k + 1], 1e-12, &err);
    }
    err_total += err;
  }
  if (!std::isfinite(total) || err_total > abs_tol) {
    throw Error(ErrorKind::QuadratureFailure, "quadrature error estimate " + format_number(err_total) +
                                                  " exceeds tolerance on [" + std::to_string(a) + ", " +
                                                  std::to_string(b) + "]");
  }
  return total;
}

/// Population quantities of a scenario at time t and covariate z.
struct PopulationQuantities {
  double baseline_cumulative = 0.0;             ///< Lambda0(t) or R0(t), closed form
  double baseline_cumulative_quadrature = 0.0;  ///< same via the H0 / E{...} representation
  double lifetime_curve = 0.0;                  ///< S_T(t | z) (RightCS) or F_T(t | z) (LeftCS)
  double risk_denominator = 0.0;                ///< e^(0)(t; theta0) or l^(0)(t; theta0)
  std::array<double, 3> sub_distribution{};    ///< H_k([0, t])
  std::array<double, 3> total_mass{};          ///< H_k([0, inf))
  double p_from_masses = 0.0;
};

/// Conditional sub-densities h_k(s | z) of (X, A) and related integrands.
class ScenarioDensities {
 public:
  explicit ScenarioDensities(const ScenarioSpec& spec)
      : spec_(spec), life_(spec), nodes_(covariate_nodes(spec.covariates, spec.beta0.size())) {
    cuts_ = life_.breakpoints();
    const auto cb = spec.censoring.breakpoints();
    cuts_.insert(cuts_.end(), cb.begin(), cb.end());
  }

  const LifetimeLaw& lifetime() const { return life_; }
  const std::vector<std::pair<Vector, double>>& nodes() const { return nodes_; }
  const std::vector<double>& cuts() const { return cuts_; }

  double sub_density(int k, double s, const Vector& z) const {
    const Law& c = spec_.censoring;
    const double p = spec_.p0;
    if (spec_.model == Model::RightCS) {
      switch (k) {
        case 0: return p * c.survival(s) * life_.density(s, z);
        case 1: return c.density(s) * life_.survival(s, z);
        default: return (1.0 - p) * c.density(s) * life_.cdf(s, z);
      }
    }
    switch (k) {
      case 0: {
        const double fc = c.cdf(s);
        return fc > 0.0 ? p * fc * life_.density(s, z) : 0.0;
      }
      case 1: return (1.0 - p) * c.density(s) * life_.survival(s, z);
      default: return c.density(s) * life_.cdf(s, z);
    }
  }

  /// Integrated over the covariate law.
  double marginal_sub_density(int k, double s) const {
    double acc = 0.0;
    for (const auto& [z, w] : nodes_) acc += w * sub_density(k, s, z);
    return acc;
  }

  /// E{exp(beta'Z) [H0(risk | Z) + p H_other(risk | Z)]} through the product identity
  /// p S_T(s|z) S_C(s) (RightCS) or p F_T(s|z) F_C(s) (LeftCS).
  double risk_denominator_identity(double s) const {
    double acc = 0.0;
    for (const auto& [z, w] : nodes_) {
      const double lifetime_part =
          spec_.model == Model::RightCS ? life_.survival(s, z) * spec_.censoring.survival(s)
                                        : life_.cdf(s, z) * spec_.censoring.cdf(s);
      acc += w * life_.risk(z) * spec_.p0 * lifetime_part;
    }
    return acc;
  }

 private:
  ScenarioSpec spec_;
  LifetimeLaw life_;
  std::vector<std::pair<Vector, double>> nodes_;
  std::vector<double> cuts_;
};

inline PopulationQuantities population_oracle(const ScenarioSpec& spec, double t, const Vector& z) {
  spec.check();
  if (z.size() != spec.beta0.size()) throw Error(ErrorKind::InconsistentCovariateDim, "z has wrong dimension");
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "t must be finite and >= 0");
  const ScenarioDensities dens(spec);
  const double inf = std::numeric_limits<double>::infinity();
  const bool right = spec.model == Model::RightCS;
  PopulationQuantities out;

  out.baseline_cumulative = dens.lifetime().baseline_cumulative(t);
  out.lifetime_curve = right ? dens.lifetime().survival(t, z) : dens.lifetime().cdf(t, z);

  for (int k = 0; k < 3; ++k) {
    auto h = [&](double s) { return dens.marginal_sub_density(k, s); };
    out.sub_distribution[static_cast<std::size_t>(k)] = integrate(h, 0.0, t, dens.cuts());
    out.total_mass[static_cast<std::size_t>(k)] = integrate(h, 0.0, inf, dens.cuts());
  }
  const double h0 = out.total_mass[0];
  out.p_from_masses = right ? h0 / (h0 + out.total_mass[2]) : h0 / (h0 + out.total_mass[1]);

  // Risk denominator from the conditional sub-distributions directly.
  const int other = right ? 1 : 2;
  double denom = 0.0;
  for (const auto& [zz, w] : dens.nodes()) {
    auto h_event = [&](double s) { return dens.sub_density(0, s, zz); };
    auto h_other = [&](double s) { return dens.sub_density(other, s, zz); };
    const double a = right ? integrate(h_event, t, inf, dens.cuts()) : integrate(h_event, 0.0, t, dens.cuts());
    const double b = right ? integrate(h_other, t, inf, dens.cuts()) : integrate(h_other, 0.0, t, dens.cuts());
    denom += w * dens.lifetime().risk(zz) * (a + spec.p0 * b);
  }
  out.risk_denominator = denom;

  // Baseline through H0(ds) / E{...}.
  auto ratio = [&](double s) {
    const double e = dens.risk_denominator_identity(s);
    return e > 0.0 ? dens.marginal_sub_density(0, s) / e : 0.0;
  };
  out.baseline_cumulative_quadrature =
      right ? integrate(ratio, 0.0, t, dens.cuts()) : integrate(ratio, t, inf, dens.cuts());
  return out;
}

}  // namespace cscox
