#pragma once

// Domain types shared by every cscox module: observations, validated
// datasets, parameters, step functions and fit configuration.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cscox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Which latent censoring mechanism the data are analysed under.
enum class Model {
  RightCS,  ///< right censoring mixed with current status (A=2 means T <= X)
  LeftCS    ///< left censoring mixed with current status (A=1 means T >= X)
};

inline const char* model_name(Model m) {
  return m == Model::RightCS ? "right-cs" : "left-cs";
}

enum class ErrorKind {
  InvalidArgument,
  NonFiniteValue,
  BadStatusCode,
  InconsistentCovariateDim,
  NoUncensoredEvents,
  TruncationInfeasible,
  ZeroRiskSet,
  DegenerateCurrentStatus,
  MissingJumpAtEvent,
  NumericOverflow,
  InsufficientReplicates,
  BootstrapDegenerate,
  QuadratureFailure,
  SchemaError,
  IoError
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::BadStatusCode: return "BadStatusCode";
    case ErrorKind::InconsistentCovariateDim: return "InconsistentCovariateDim";
    case ErrorKind::NoUncensoredEvents: return "NoUncensoredEvents";
    case ErrorKind::TruncationInfeasible: return "TruncationInfeasible";
    case ErrorKind::ZeroRiskSet: return "ZeroRiskSet";
    case ErrorKind::DegenerateCurrentStatus: return "DegenerateCurrentStatus";
    case ErrorKind::MissingJumpAtEvent: return "MissingJumpAtEvent";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorKind::BootstrapDegenerate: return "BootstrapDegenerate";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Non-fatal condition attached to datasets, fits and curves.
/// Shortest round-trippable text: 17 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Warning {
  std::string code;
  std::string message;
};

inline bool has_warning(const std::vector<Warning>& ws, const std::string& code) {
  return std::any_of(ws.begin(), ws.end(), [&](const Warning& w) { return w.code == code; });
}

/// One observed record: duration, status in {0,1,2}, covariates.
struct Observation {
  double x = 0.0;
  int a = 0;
  Vector z;
};

/// Validated, sorted, immutable sample.
///
/// Records are ordered by duration, then status, then original position.
/// Each record carries a weight (all ones unless the dataset was built by
/// `with_weights`); every empirical average is (1/n) sum_i w_i (...).
class Dataset {
 public:
  Dataset() = default;

  Model model() const noexcept { return model_; }
  std::size_t size() const noexcept { return x_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(z_.cols()); }

  double x(std::size_t i) const { return x_[i]; }
  int status(std::size_t i) const { return a_[i]; }
  auto z(std::size_t i) const { return z_.row(static_cast<Eigen::Index>(i)); }
  double weight(std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }

  const std::vector<double>& durations() const noexcept { return x_; }
  const std::vector<int>& statuses() const noexcept { return a_; }
  const Matrix& covariates() const noexcept { return z_; }
  const Vector& weights() const noexcept { return w_; }
  const std::vector<std::size_t>& original_index() const noexcept { return original_; }
  const std::vector<Warning>& warnings() const noexcept { return warnings_; }

  bool unit_weights() const { return (w_.array() == 1.0).all(); }

  /// Same records with per-observation weights (in sorted order).
  Dataset with_weights(Vector w) const {
    if (static_cast<std::size_t>(w.size()) != size()) {
      throw Error(ErrorKind::InvalidArgument, "weight vector length does not match dataset size");
    }
    if (!w.allFinite() || (w.array() < 0.0).any()) {
      throw Error(ErrorKind::InvalidArgument, "weights must be finite and nonnegative");
    }
    Dataset out = *this;
    out.w_ = std::move(w);
    return out;
  }

  /// Same records with replaced covariates (rows in sorted order).
  Dataset with_covariates(Matrix z) const {
    if (static_cast<std::size_t>(z.rows()) != size() || z.cols() < 1) {
      throw Error(ErrorKind::InconsistentCovariateDim, "covariate matrix shape mismatch");
    }
    if (!z.allFinite()) throw Error(ErrorKind::NonFiniteValue, "covariates must be finite");
    Dataset out = *this;
    out.z_ = std::move(z);
    return out;
  }

  /// Covariates shifted by their sample mean.
  Dataset centered() const {
    Eigen::RowVectorXd mean = z_.colwise().mean();
    return with_covariates(z_.rowwise() - mean);
  }

  /// Records in sorted order, as accepted by `validate`.
  std::vector<Observation> records() const {
    std::vector<Observation> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
      out[i] = Observation{x_[i], a_[i], z_.row(static_cast<Eigen::Index>(i)).transpose()};
    }
    return out;
  }

  friend Dataset validate(std::vector<Observation> records, Model model,
                          std::optional<double> tie_jitter);

 private:
  Model model_ = Model::RightCS;
  std::vector<double> x_;
  std::vector<int> a_;
  Matrix z_;
  Vector w_;
  std::vector<std::size_t> original_;
  std::vector<Warning> warnings_;
};

/// Checks raw records and returns a sorted Dataset.
///
/// Ties in duration are kept; at a tied time events (a=0) come first. With
/// `tie_jitter` set, record i (original position) is shifted by i * jitter
/// before sorting.
inline Dataset validate(std::vector<Observation> records, Model model,
                        std::optional<double> tie_jitter = std::nullopt) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no records");
  const Eigen::Index q = records.front().z.size();
  if (q < 1) throw Error(ErrorKind::InconsistentCovariateDim, "at least one covariate is required");
  if (tie_jitter && !(*tie_jitter > 0.0 && std::isfinite(*tie_jitter))) {
    throw Error(ErrorKind::InvalidArgument, "tie_jitter must be a positive finite number");
  }

  bool any_event = false;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.z.size() != q) {
      throw Error(ErrorKind::InconsistentCovariateDim,
                  "record " + std::to_string(i) + " has " + std::to_string(r.z.size()) +
                      " covariates, expected " + std::to_string(q));
    }
    if (!std::isfinite(r.x) || r.x < 0.0) {
      throw Error(ErrorKind::NonFiniteValue,
                  "record " + std::to_string(i) + ": duration must be finite and nonnegative");
    }
    if (!r.z.allFinite()) {
      throw Error(ErrorKind::NonFiniteValue, "record " + std::to_string(i) + ": non-finite covariate");
    }
    if (r.a < 0 || r.a > 2) {
      throw Error(ErrorKind::BadStatusCode,
                  "record " + std::to_string(i) + ": status " + std::to_string(r.a) + " not in {0,1,2}");
    }
    any_event = any_event || r.a == 0;
  }
  if (!any_event) throw Error(ErrorKind::NoUncensoredEvents, "no record with status 0");

  if (tie_jitter) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].x += static_cast<double>(i) * *tie_jitter;
    }
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (records[l].x != records[r].x) return records[l].x < records[r].x;
    if (records[l].a != records[r].a) return records[l].a < records[r].a;
    return l < r;
  });

  Dataset ds;
  ds.model_ = model;
  const std::size_t n = records.size();
  ds.x_.resize(n);
  ds.a_.resize(n);
  ds.z_.resize(static_cast<Eigen::Index>(n), q);
  ds.w_ = Vector::Ones(static_cast<Eigen::Index>(n));
  ds.original_ = order;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = records[order[k]];
    ds.x_[k] = r.x;
    ds.a_[k] = r.a;
    ds.z_.row(static_cast<Eigen::Index>(k)) = r.z.transpose();
  }

  if (n < 2) {
    ds.warnings_.push_back({"DegenerateDesign", "covariate variance undefined for a single record"});
  } else {
    Matrix centered = ds.z_.rowwise() - ds.z_.colwise().mean();
    Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(top, 1.0)) {
      ds.warnings_.push_back({"DegenerateDesign", "covariate variance matrix is not positive definite"});
    }
  }
  return ds;
}

/// Finite-dimensional parameter (p, beta).
struct Theta {
  double p = 1.0;
  Vector beta;
};

/// Nondecreasing pure-jump function on [0, inf): value(t) = sum of increments at times <= t.
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<double> times, std::vector<double> increments)
      : times_(std::move(times)), increments_(std::move(increments)) {
    if (times_.size() != increments_.size()) {
      throw Error(ErrorKind::InvalidArgument, "step function: times and increments differ in length");
    }
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!(std::isfinite(times_[k]) && times_[k] >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "step function: jump times must be finite and >= 0");
      }
      if (k > 0 && !(times_[k] > times_[k - 1])) {
        throw Error(ErrorKind::InvalidArgument, "step function: jump times must be strictly increasing");
      }
      if (!(increments_[k] > 0.0) || !std::isfinite(increments_[k])) {
        throw Error(ErrorKind::InvalidArgument, "step function: increments must be positive and finite");
      }
    }
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& increments() const noexcept { return increments_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  /// Sum of increments at times <= t.
  double operator()(double t) const {
    const auto end = std::upper_bound(times_.begin(), times_.end(), t);
    return std::accumulate(increments_.begin(), increments_.begin() + (end - times_.begin()), 0.0);
  }

  /// Sum of increments at times > t (cumulative reverse hazard convention).
  double tail(double t) const {
    const auto begin = std::upper_bound(times_.begin(), times_.end(), t);
    return std::accumulate(increments_.begin() + (begin - times_.begin()), increments_.end(), 0.0);
  }

  double total() const { return std::accumulate(increments_.begin(), increments_.end(), 0.0); }

  /// Increment located exactly at t (0 when t is not a jump time).
  double jump_at(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.end() || *it != t) return 0.0;
    return increments_[static_cast<std::size_t>(it - times_.begin())];
  }

 private:
  std::vector<double> times_;
  std::vector<double> increments_;
};

/// Options of the estimating pipeline.
struct FitConfig {
  std::optional<double> tau;  ///< right-model truncation; nullopt = largest event time
  std::optional<double> rho;  ///< left-model truncation; nullopt = smallest event time
  double beta_lower = -20.0;
  double beta_upper = 20.0;
  Vector beta_lower_by_coord;  ///< overrides beta_lower when non-empty
  Vector beta_upper_by_coord;
  double p_floor = 1e-3;
  double grad_tol = 1e-8;
  double step_tol = 1e-14;
  int max_iter = 200;
  int random_starts = 4;
  std::uint64_t seed = 20240611;
  std::optional<double> tie_jitter;

  Vector lower_bounds(std::size_t q) const {
    if (beta_lower_by_coord.size() > 0) return beta_lower_by_coord;
    return Vector::Constant(static_cast<Eigen::Index>(q), beta_lower);
  }
  Vector upper_bounds(std::size_t q) const {
    if (beta_upper_by_coord.size() > 0) return beta_upper_by_coord;
    return Vector::Constant(static_cast<Eigen::Index>(q), beta_upper);
  }
};

/// Truncation point actually used by a fit: tau for RightCS, rho for LeftCS.
///
/// Automatic choice: largest (RightCS) or smallest (LeftCS) event time. A user
/// value needs positive empirical risk mass at the bound: some record with
/// x >= tau and a in {0,1}, or x <= rho and a in {0,2}.
inline double resolve_truncation(const Dataset& ds, const FitConfig& config) {
  const auto& x = ds.durations();
  const auto& a = ds.statuses();
  const std::size_t n = ds.size();
  if (ds.model() == Model::RightCS) {
    if (!config.tau) {
      double tau = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0 && ds.weight(i) > 0.0) tau = std::max(tau, x[i]);
      }
      if (tau < 0.0) throw Error(ErrorKind::NoUncensoredEvents, "no weighted event to set tau");
      return tau;
    }
    const double tau = *config.tau;
    if (!(tau > 0.0) || !std::isfinite(tau)) {
      throw Error(ErrorKind::TruncationInfeasible, "tau must be positive and finite");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] >= tau && a[i] != 2 && ds.weight(i) > 0.0) return tau;
    }
    throw Error(ErrorKind::TruncationInfeasible,
                "no observation with x >= tau and status in {0,1}: empirical H0([tau,inf)) + "
                "H1([tau,inf)) is zero");
  }
  if (!config.rho) {
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == 0 && ds.weight(i) > 0.0) rho = std::min(rho, x[i]);
    }
    if (!std::isfinite(rho)) throw Error(ErrorKind::NoUncensoredEvents, "no weighted event to set rho");
    return rho;
  }
  const double rho = *config.rho;
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorKind::TruncationInfeasible, "rho must be positive and finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] <= rho && a[i] != 1 && ds.weight(i) > 0.0) return rho;
  }
  throw Error(ErrorKind::TruncationInfeasible,
              "no observation with x <= rho and status in {0,2}: empirical H0([0,rho]) + "
              "H2([0,rho]) is zero");
}

}  // namespace cscox
