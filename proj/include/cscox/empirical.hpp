#pragma once

// Empirical functionals: counting processes, exp(beta'z)-weighted risk sums
// and the plug-in cumulative (reverse) hazard step functions.

#include "cscox/core.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace cscox {

/// Risk sums at a fixed (t, beta), indexed by status k.
///
/// RightCS: order0[k] = (1/n) sum w_i exp(beta'Z_i) 1(X_i >= t, A_i = k).
/// LeftCS:  same with 1(X_i <= t, A_i = k).
/// order1[k] carries the extra factor Z_i.
struct RiskSums {
  std::array<double, 3> order0{0.0, 0.0, 0.0};
  std::array<Vector, 3> order1;
};

/// E_n (RightCS) or L_n (LeftCS) at a fixed (t, p, beta).
struct CombinedRisk {
  double order0 = 0.0;
  Vector order1;
};

namespace detail {

// A fit is computed on a "natural" time axis: ascending durations for the
// right model, descending for the left one. On that axis both models read
// the same way: risk sets are the records at or after t, current-status
// integrals run over events at or before X_i, and the truncation window is
// everything at or before the bound.
struct Axis {
  bool forward = true;
  int censored = 1;  // status that stays in the risk set without an event
  int current = 2;   // current-status code

  static Axis of(Model m) { return m == Model::RightCS ? Axis{true, 1, 2} : Axis{false, 2, 1}; }

  bool at_or_before(double s, double t) const { return forward ? s <= t : s >= t; }
  std::size_t natural(std::size_t k, std::size_t n) const { return forward ? k : n - 1 - k; }
};

// Per-event-time quantities on the natural axis, restricted to the window.
// All risk sums are scaled by exp(-shift) with shift = max_i beta'Z_i.
struct EventTable {
  std::vector<double> time;
  std::vector<double> dN;        // (1/n) sum of event weights at the time
  std::vector<double> e0p;       // E^(0)(t; p, beta) * exp(-shift)
  std::vector<double> e01;       // E^(0)(t; 1, beta) * exp(-shift)
  std::vector<double> linpred;   // (1/n) sum over events of w_i beta'Z_i
  Matrix e1p;                    // q x m
  Matrix e11;
  Matrix zsum;                   // (1/n) sum over events of w_i Z_i
  Vector eta;                    // beta'Z_i per record
  double shift = 0.0;

  std::size_t size() const { return time.size(); }
};

inline EventTable build_event_table(const Dataset& ds, double p, const Vector& beta, double bound,
                                    Axis axis, bool first_order) {
  const std::size_t n = ds.size();
  const Eigen::Index q = static_cast<Eigen::Index>(ds.dim());
  if (beta.size() != q) {
    throw Error(ErrorKind::InconsistentCovariateDim, "beta has wrong dimension");
  }
  EventTable tab;
  tab.eta = ds.covariates() * beta;
  tab.shift = n > 0 ? tab.eta.maxCoeff() : 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  double s0_event = 0.0, s0_cens = 0.0;
  Vector s1_event = Vector::Zero(q), s1_cens = Vector::Zero(q);
  std::vector<Vector> e1p_cols, e11_cols, zsum_cols;

  // Sweep from the far end of the natural axis so that risk sums grow.
  std::size_t k = 0;
  while (k < n) {
    const std::size_t first = axis.natural(n - 1 - k, n);
    const double t = ds.x(first);
    double dN = 0.0, lin = 0.0;
    Vector zs = Vector::Zero(q);
    while (k < n && ds.x(axis.natural(n - 1 - k, n)) == t) {
      const std::size_t i = axis.natural(n - 1 - k, n);
      const int a = ds.status(i);
      const double w = ds.weight(i);
      if (a == 0 || a == axis.censored) {
        const double r = w * std::exp(tab.eta[static_cast<Eigen::Index>(i)] - tab.shift) * inv_n;
        if (a == 0) {
          s0_event += r;
          if (first_order) s1_event += r * ds.z(i).transpose();
        } else {
          s0_cens += r;
          if (first_order) s1_cens += r * ds.z(i).transpose();
        }
      }
      if (a == 0 && w > 0.0) {
        dN += w * inv_n;
        lin += w * tab.eta[static_cast<Eigen::Index>(i)] * inv_n;
        if (first_order) zs += w * inv_n * ds.z(i).transpose();
      }
      ++k;
    }
    if (dN > 0.0 && axis.at_or_before(t, bound)) {
      const double e0p = s0_event + p * s0_cens;
      if (!(e0p > 0.0)) {
        throw Error(ErrorKind::ZeroRiskSet, "empty weighted risk set at event time " + std::to_string(t));
      }
      tab.time.push_back(t);
      tab.dN.push_back(dN);
      tab.e0p.push_back(e0p);
      tab.e01.push_back(s0_event + s0_cens);
      tab.linpred.push_back(lin);
      if (first_order) {
        e1p_cols.push_back(s1_event + p * s1_cens);
        e11_cols.push_back(s1_event + s1_cens);
        zsum_cols.push_back(zs);
      }
    }
  }

  // Back to natural order.
  std::reverse(tab.time.begin(), tab.time.end());
  std::reverse(tab.dN.begin(), tab.dN.end());
  std::reverse(tab.e0p.begin(), tab.e0p.end());
  std::reverse(tab.e01.begin(), tab.e01.end());
  std::reverse(tab.linpred.begin(), tab.linpred.end());
  if (first_order) {
    const Eigen::Index m = static_cast<Eigen::Index>(tab.time.size());
    tab.e1p.resize(q, m);
    tab.e11.resize(q, m);
    tab.zsum.resize(q, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t src = static_cast<std::size_t>(m - 1 - j);
      tab.e1p.col(j) = e1p_cols[src];
      tab.e11.col(j) = e11_cols[src];
      tab.zsum.col(j) = zsum_cols[src];
    }
  }
  return tab;
}

// Jump sizes N(ds)/E^(0)(s) in ascending time order.
inline StepFunction hazard_from_table(const EventTable& tab, Axis axis) {
  std::vector<double> times(tab.size()), incs(tab.size());
  const double scale = std::exp(-tab.shift);
  for (std::size_t j = 0; j < tab.size(); ++j) {
    const std::size_t dst = axis.forward ? j : tab.size() - 1 - j;
    times[dst] = tab.time[j];
    incs[dst] = tab.dN[j] / tab.e0p[j] * scale;
    if (!(incs[dst] > 0.0) || !std::isfinite(incs[dst])) {
      throw Error(ErrorKind::ZeroRiskSet,
                  "hazard increment not representable at event time " + std::to_string(tab.time[j]));
    }
  }
  return StepFunction(std::move(times), std::move(incs));
}

}  // namespace detail

/// N_{n,k}: weighted empirical counts of status-k durations, (1/n) per unit weight.
inline StepFunction counting_process(const Dataset& ds, int k) {
  if (k < 0 || k > 2) throw Error(ErrorKind::BadStatusCode, "status must be in {0,1,2}");
  std::vector<double> times, incs;
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.status(i) != k || ds.weight(i) <= 0.0) continue;
    const double mass = ds.weight(i) * inv_n;
    if (!times.empty() && times.back() == ds.x(i)) {
      incs.back() += mass;
    } else {
      times.push_back(ds.x(i));
      incs.push_back(mass);
    }
  }
  return StepFunction(std::move(times), std::move(incs));
}

/// Risk sums at t for the dataset's model (X >= t for RightCS, X <= t for LeftCS).
inline RiskSums risk_sums(const Dataset& ds, double t, const Vector& beta) {
  const Eigen::Index q = static_cast<Eigen::Index>(ds.dim());
  if (beta.size() != q) throw Error(ErrorKind::InconsistentCovariateDim, "beta has wrong dimension");
  RiskSums out;
  for (auto& v : out.order1) v = Vector::Zero(q);
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  const bool right = ds.model() == Model::RightCS;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool at_risk = right ? ds.x(i) >= t : ds.x(i) <= t;
    if (!at_risk) continue;
    const double r = ds.weight(i) * std::exp(ds.z(i).dot(beta)) * inv_n;
    const auto a = static_cast<std::size_t>(ds.status(i));
    out.order0[a] += r;
    out.order1[a] += r * ds.z(i).transpose();
  }
  return out;
}

inline double risk_sum0(const Dataset& ds, double t, const Vector& beta, int k) {
  return risk_sums(ds, t, beta).order0.at(static_cast<std::size_t>(k));
}

inline Vector risk_sum1(const Dataset& ds, double t, const Vector& beta, int k) {
  return risk_sums(ds, t, beta).order1.at(static_cast<std::size_t>(k));
}

/// E_n = S_{n,0} + p S_{n,1} (RightCS) or L_n = F_{n,0} + p F_{n,2} (LeftCS).
inline CombinedRisk combined_risk(const RiskSums& sums, double p, Model model) {
  const std::size_t other = model == Model::RightCS ? 1 : 2;
  return CombinedRisk{sums.order0[0] + p * sums.order0[other], sums.order1[0] + p * sums.order1[other]};
}

inline CombinedRisk combined_risk(const Dataset& ds, double t, double p, const Vector& beta) {
  return combined_risk(risk_sums(ds, t, beta), p, ds.model());
}

/// Lambda_n(.; p, beta): jumps N_{n,0}(ds) / E_n^(0)(s; p, beta) at event times s <= tau.
/// Uses right-model risk sets regardless of the dataset's tag.
inline StepFunction cumulative_hazard(const Dataset& ds, const Theta& theta, double tau) {
  const auto axis = detail::Axis::of(Model::RightCS);
  return detail::hazard_from_table(
      detail::build_event_table(ds, theta.p, theta.beta, tau, axis, false), axis);
}

/// R_n(.; p, beta): increments N_{n,0}(ds) / L_n^(0)(s; p, beta) at event times s >= rho.
/// The cumulative reverse hazard is `result.tail(t)`. Uses left-model risk sets.
inline StepFunction reverse_hazard(const Dataset& ds, const Theta& theta, double rho) {
  const auto axis = detail::Axis::of(Model::LeftCS);
  return detail::hazard_from_table(
      detail::build_event_table(ds, theta.p, theta.beta, rho, axis, false), axis);
}

/// Model-dispatched baseline: Lambda_n for RightCS, R_n increments for LeftCS.
inline StepFunction baseline_hazard(const Dataset& ds, const Theta& theta, double bound) {
  return ds.model() == Model::RightCS ? cumulative_hazard(ds, theta, bound)
                                      : reverse_hazard(ds, theta, bound);
}

}  // namespace cscox
