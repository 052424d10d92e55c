#pragma once

// Dataset files, result documents, hazard/curve tables and scenario configs.
//
// Data file:   header `x,a,z1,...,zq`, one record per row.
// result.json: fitted parameters and diagnostics (see README for fields).
// hazard.csv:  time,increment,cumulative[,lower,upper]
// curve_K.csv: time,value[,lower,upper] for the K-th requested covariate value.
// Every number in a table is written with 17 significant digits.

#include "cscox/bootstrap.hpp"
#include "cscox/core.hpp"
#include "cscox/estimator.hpp"
#include "cscox/simulate.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cscox {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

template <class T>
std::optional<T> parse_exact(std::string_view s) {
  T v{};
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

inline std::vector<double> parse_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  for (auto item : split(text, ',')) {
    auto v = parse_exact<double>(item);
    if (!v) throw Error(ErrorKind::SchemaError, "cannot parse '" + std::string(item) + "' in " + what);
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

/// Parses data-file text. `source` names the input in error messages.
inline Dataset parse_dataset(std::string_view text, Model model, const std::string& source = "<input>",
                             std::optional<double> tie_jitter = std::nullopt) {
  std::vector<std::string_view> lines;
  for (auto line : detail::split(text, '\n')) lines.push_back(line);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorKind::SchemaError, source + ": empty file");

  const auto header = detail::split(lines.front(), ',');
  if (header.size() < 3) {
    throw Error(ErrorKind::SchemaError, source + ": header must be x,a,z1,...,zq with at least one covariate");
  }
  if (header[0] != "x" || header[1] != "a") {
    throw Error(ErrorKind::SchemaError, source + ": header must start with x,a");
  }
  for (std::size_t j = 2; j < header.size(); ++j) {
    if (header[j] != "z" + std::to_string(j - 1)) {
      throw Error(ErrorKind::SchemaError,
                  source + ": column " + std::to_string(j + 1) + " must be named z" + std::to_string(j - 1));
    }
  }
  const std::size_t q = header.size() - 2;

  std::vector<Observation> records;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split(lines[r], ',');
    const std::string where = source + ": row " + std::to_string(r + 1);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::SchemaError, where + ": expected " + std::to_string(header.size()) + " cells, got " +
                                              std::to_string(cells.size()));
    }
    Observation obs;
    auto x = detail::parse_exact<double>(cells[0]);
    if (!x) throw Error(ErrorKind::SchemaError, where + ", column x: not a number");
    auto a = detail::parse_exact<int>(cells[1]);
    if (!a) throw Error(ErrorKind::SchemaError, where + ", column a: not an integer status");
    obs.x = *x;
    obs.a = *a;
    obs.z.resize(static_cast<Eigen::Index>(q));
    for (std::size_t j = 0; j < q; ++j) {
      auto v = detail::parse_exact<double>(cells[j + 2]);
      if (!v) throw Error(ErrorKind::SchemaError, where + ", column z" + std::to_string(j + 1) + ": not a number");
      obs.z[static_cast<Eigen::Index>(j)] = *v;
    }
    records.push_back(std::move(obs));
  }
  if (records.empty()) throw Error(ErrorKind::SchemaError, source + ": no data rows");
  return validate(std::move(records), model, tie_jitter);
}

inline Dataset read_dataset(const std::filesystem::path& path, Model model,
                            std::optional<double> tie_jitter = std::nullopt) {
  return parse_dataset(detail::read_file(path), model, path.string(), tie_jitter);
}

inline std::string format_dataset(const Dataset& ds) {
  std::string out = "x,a";
  for (std::size_t j = 1; j <= ds.dim(); ++j) out += ",z" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += format_number(ds.x(i)) + ',' + std::to_string(ds.status(i));
    for (Eigen::Index j = 0; j < ds.z(i).size(); ++j) out += ',' + format_number(ds.z(i)[j]);
    out += '\n';
  }
  return out;
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << format_dataset(ds);
}

// ---------------------------------------------------------------------------
// Results

/// What `write_results` records about a fit, as read back from result.json.
struct ResultDocument {
  Model model = Model::RightCS;
  std::size_t n = 0;
  Theta theta_hat;
  double truncation = 0.0;
  double loglik_at_max = 0.0;
  double score_norm_at_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t dropped_terms = 0;
  std::vector<std::string> warnings;
};

inline nlohmann::json interval_json(const Interval& iv) { return nlohmann::json::array({iv.lower, iv.upper}); }

inline nlohmann::json result_json(const FitResult& fit, const MultiplierDraws* draws, const ConfidenceIntervals* ci,
                                  const std::vector<Vector>& curve_z) {
  using nlohmann::json;
  json doc;
  doc["model"] = model_name(fit.model);
  doc["n"] = fit.n;
  doc["p_hat"] = fit.theta_hat.p;
  doc["beta_hat"] = std::vector<double>(fit.theta_hat.beta.data(), fit.theta_hat.beta.data() + fit.theta_hat.beta.size());
  doc["truncation"] = fit.truncation;
  doc["loglik_at_max"] = fit.loglik_at_max;
  doc["score_norm_at_max"] = fit.score_norm_at_max;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["dropped_terms"] = fit.dropped_terms;
  doc["hazard_jumps"] = fit.hazard.size();
  json warnings = json::array();
  for (const auto& w : fit.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}});
  doc["warnings"] = warnings;
  json curves = json::array();
  for (std::size_t k = 0; k < curve_z.size(); ++k) {
    curves.push_back({{"file", "curve_" + std::to_string(k + 1) + ".csv"},
                      {"z", std::vector<double>(curve_z[k].data(), curve_z[k].data() + curve_z[k].size())}});
  }
  doc["curves"] = curves;
  if (draws) {
    json b;
    b["replicates"] = draws->replicate_count;
    b["seed"] = draws->seed;
    b["weight_law"] = weight_law_name(draws->law);
    b["failures"] = draws->failures;
    if (ci) {
      b["level"] = ci->level;
      b["used"] = ci->used;
      b["p_interval"] = interval_json(ci->p);
      json betas = json::array();
      for (const auto& iv : ci->beta) betas.push_back(interval_json(iv));
      b["beta_intervals"] = betas;
    }
    doc["bootstrap"] = b;
  }
  return doc;
}

/// Writes result.json, hazard.csv and one curve_K.csv per entry of `curve_z` into `dir`.
inline void write_results(const FitResult& fit, const MultiplierDraws* draws, const std::filesystem::path& dir,
                          const std::vector<Vector>& curve_z = {}, double level = 0.95) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::optional<ConfidenceIntervals> ci;
  if (draws) ci = confidence_intervals(*draws, level);
  const ConfidenceIntervals* cip = ci ? &*ci : nullptr;

  {
    auto out = detail::open_out(dir / "result.json");
    out << result_json(fit, draws, cip, curve_z).dump(2) << '\n';
  }
  {
    auto out = detail::open_out(dir / "hazard.csv");
    out << "time,increment,cumulative" << (cip ? ",lower,upper" : "") << '\n';
    const auto& t = fit.hazard.times();
    const auto& inc = fit.hazard.increments();
    for (std::size_t k = 0; k < t.size(); ++k) {
      out << format_number(t[k]) << ',' << format_number(inc[k]) << ',' << format_number(fit.cumulative(t[k]));
      if (cip) out << ',' << format_number(cip->hazard[k].lower) << ',' << format_number(cip->hazard[k].upper);
      out << '\n';
    }
  }
  for (std::size_t c = 0; c < curve_z.size(); ++c) {
    // Curves live on the hazard's jump times, where the bootstrap bands are defined.
    const ConditionalCurve curve = lifetime_curve(fit, curve_z[c], fit.hazard.times());
    const bool bands = cip && draws && c < draws->curve_z.size();
    auto out = detail::open_out(dir / ("curve_" + std::to_string(c + 1) + ".csv"));
    out << "time,value" << (bands ? ",lower,upper" : "") << '\n';
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
      out << format_number(curve.times[k]) << ',' << format_number(curve.values[k]);
      if (bands) out << ',' << format_number(cip->curves[c][k].lower) << ',' << format_number(cip->curves[c][k].upper);
      out << '\n';
    }
  }
}

/// Per-replicate estimates: replicate,failed,p,beta1..betaq.
inline void write_replicates(const MultiplierDraws& draws, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  std::size_t q = 0;
  for (const auto& r : draws.replicates) q = std::max<std::size_t>(q, static_cast<std::size_t>(r.theta.beta.size()));
  out << "replicate,failed,p";
  for (std::size_t j = 1; j <= q; ++j) out << ",beta" << j;
  out << '\n';
  for (std::size_t b = 0; b < draws.replicates.size(); ++b) {
    const auto& r = draws.replicates[b];
    out << b << ',' << (r.failed ? 1 : 0) << ',' << (r.theta.beta.size() ? format_number(r.theta.p) : "nan");
    for (std::size_t j = 0; j < q; ++j) {
      out << ',' << (j < static_cast<std::size_t>(r.theta.beta.size()) ? format_number(r.theta.beta[static_cast<Eigen::Index>(j)]) : "nan");
    }
    out << '\n';
  }
}

inline ResultDocument read_result_document(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
    ResultDocument out;
    out.model = doc.at("model").get<std::string>() == "left-cs" ? Model::LeftCS : Model::RightCS;
    out.n = doc.at("n").get<std::size_t>();
    out.theta_hat.p = doc.at("p_hat").get<double>();
    const auto beta = doc.at("beta_hat").get<std::vector<double>>();
    out.theta_hat.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    out.truncation = doc.at("truncation").get<double>();
    out.loglik_at_max = doc.at("loglik_at_max").get<double>();
    out.score_norm_at_max = doc.at("score_norm_at_max").get<double>();
    out.iterations = doc.at("iterations").get<int>();
    out.converged = doc.at("converged").get<bool>();
    out.dropped_terms = doc.at("dropped_terms").get<std::size_t>();
    for (const auto& w : doc.at("warnings")) out.warnings.push_back(w.at("code").get<std::string>());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
}

/// Rebuilds the hazard step function from the time and increment columns of hazard.csv.
inline StepFunction read_hazard_table(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::split(lines.front(), ',').size() < 3) {
    throw Error(ErrorKind::SchemaError, path.string() + ": not a hazard table");
  }
  std::vector<double> times, incs;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = detail::split(lines[r], ',');
    auto t = detail::parse_exact<double>(cells[0]);
    auto d = cells.size() > 1 ? detail::parse_exact<double>(cells[1]) : std::nullopt;
    if (!t || !d) throw Error(ErrorKind::SchemaError, path.string() + ": row " + std::to_string(r + 1));
    times.push_back(*t);
    incs.push_back(*d);
  }
  return StepFunction(std::move(times), std::move(incs));
}

// ---------------------------------------------------------------------------
// Scenario config: flat `key = value` lines, '#' starts a comment.
//
//   model = right-cs | left-cs          n = 500          p0 = 0.7
//   beta0 = 0.5, -0.5                   seed = 42
//   baseline = exponential | weibull | piecewise
//   baseline.rate | baseline.shape, baseline.scale | baseline.breaks, baseline.rates
//   censoring = ... (same keys under censoring.)
//   covariates = uniform | levels       covariates.lower, covariates.upper | covariates.levels
//   cure_mass = 0.3 (right-cs)          zero_mass = 0.3 (left-cs)

namespace detail {

inline Law parse_law(const std::map<std::string, std::string>& kv, const std::string& prefix) {
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::SchemaError, "scenario is missing '" + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key) {
    auto v = parse_exact<double>(get(key));
    if (!v) throw Error(ErrorKind::SchemaError, "scenario key '" + key + "' is not a number");
    return *v;
  };
  const std::string& kind = get(prefix);
  if (kind == "exponential") return Law::exponential(num(prefix + ".rate"));
  if (kind == "weibull") return Law::weibull(num(prefix + ".shape"), num(prefix + ".scale"));
  if (kind == "piecewise") {
    const auto b = kv.count(prefix + ".breaks") ? parse_list(get(prefix + ".breaks"), prefix + ".breaks")
                                                : std::vector<double>{};
    return Law::piecewise(b, parse_list(get(prefix + ".rates"), prefix + ".rates"));
  }
  throw Error(ErrorKind::SchemaError, "unknown law '" + kind + "' for " + prefix);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_number(v[i]);
  return out;
}

inline std::string format_law(const Law& law, const std::string& prefix) {
  switch (law.kind) {
    case Law::Kind::Exponential:
      return prefix + " = exponential\n" + prefix + ".rate = " + format_number(law.rate) + "\n";
    case Law::Kind::Weibull:
      return prefix + " = weibull\n" + prefix + ".shape = " + format_number(law.shape) + "\n" + prefix +
             ".scale = " + format_number(law.scale) + "\n";
    case Law::Kind::PiecewiseConstant:
      return prefix + " = piecewise\n" + (law.breaks.empty() ? "" : prefix + ".breaks = " + format_list(law.breaks) + "\n") +
             prefix + ".rates = " + format_list(law.rates) + "\n";
  }
  return {};
}

}  // namespace detail

inline ScenarioSpec parse_scenario(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::SchemaError, "scenario line " + std::to_string(line_no) + " has no '='");
    }
    kv[std::string(detail::trim(line.substr(0, eq)))] = std::string(detail::trim(line.substr(eq + 1)));
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& key) {
    auto v = get(key);
    if (!v) throw Error(ErrorKind::SchemaError, "scenario is missing '" + key + "'");
    return *v;
  };
  auto number = [&](const std::string& key, double fallback) {
    auto v = get(key);
    if (!v) return fallback;
    auto d = detail::parse_exact<double>(*v);
    if (!d) throw Error(ErrorKind::SchemaError, "scenario key '" + key + "' is not a number");
    return *d;
  };

  ScenarioSpec spec;
  const std::string model = require("model");
  if (model == "right-cs") spec.model = Model::RightCS;
  else if (model == "left-cs") spec.model = Model::LeftCS;
  else throw Error(ErrorKind::SchemaError, "scenario model must be right-cs or left-cs");
  {
    auto n = detail::parse_exact<std::size_t>(require("n"));
    if (!n || *n < 1) throw Error(ErrorKind::SchemaError, "scenario n must be a positive integer");
    spec.n = *n;
  }
  spec.p0 = number("p0", 1.0);
  const auto beta = detail::parse_list(require("beta0"), "beta0");
  spec.beta0 = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  spec.baseline = detail::parse_law(kv, "baseline");
  spec.censoring = detail::parse_law(kv, "censoring");
  const std::string cov = get("covariates").value_or("uniform");
  if (cov == "uniform") {
    spec.covariates = CovariateLaw::uniform(number("covariates.lower", -1.0), number("covariates.upper", 1.0));
  } else if (cov == "levels") {
    spec.covariates = CovariateLaw::discrete(detail::parse_list(require("covariates.levels"), "covariates.levels"));
  } else {
    throw Error(ErrorKind::SchemaError, "covariates must be uniform or levels");
  }
  spec.cure_mass = number("cure_mass", 0.0);
  spec.zero_mass = number("zero_mass", 0.0);
  if (auto s = get("seed")) {
    auto v = detail::parse_exact<std::uint64_t>(*s);
    if (!v) throw Error(ErrorKind::SchemaError, "scenario seed must be a nonnegative integer");
    spec.seed = *v;
  }
  spec.check();
  return spec;
}

inline ScenarioSpec read_scenario(const std::filesystem::path& path) {
  return parse_scenario(detail::read_file(path));
}

inline std::string format_scenario(const ScenarioSpec& spec) {
  std::string out;
  out += std::string("model = ") + model_name(spec.model) + "\n";
  out += "n = " + std::to_string(spec.n) + "\n";
  out += "p0 = " + format_number(spec.p0) + "\n";
  out += "beta0 = " + detail::format_list(std::vector<double>(spec.beta0.data(), spec.beta0.data() + spec.beta0.size())) + "\n";
  out += detail::format_law(spec.baseline, "baseline");
  out += detail::format_law(spec.censoring, "censoring");
  if (spec.covariates.kind == CovariateLaw::Kind::UniformBox) {
    out += "covariates = uniform\ncovariates.lower = " + format_number(spec.covariates.lower) +
           "\ncovariates.upper = " + format_number(spec.covariates.upper) + "\n";
  } else {
    out += "covariates = levels\ncovariates.levels = " + detail::format_list(spec.covariates.levels) + "\n";
  }
  out += "cure_mass = " + format_number(spec.cure_mass) + "\n";
  out += "zero_mass = " + format_number(spec.zero_mass) + "\n";
  out += "seed = " + std::to_string(spec.seed) + "\n";
  return out;
}

}  // namespace cscox
