// cscox: fit, simulate, bootstrap and study the current-status Cox models.
//
// Exit codes: 0 success, 1 input or runtime error, 2 optimizer did not converge
// (results are still written).

#include "cscox/cscox.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cscox;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNonConvergence = 2;

Model parse_model(const std::string& s) {
  if (s == "right-cs") return Model::RightCS;
  if (s == "left-cs") return Model::LeftCS;
  throw Error(ErrorKind::InvalidArgument, "model must be right-cs or left-cs, got '" + s + "'");
}

std::optional<double> parse_bound(const std::string& s, const char* name) {
  if (s == "auto") return std::nullopt;
  auto v = detail::parse_exact<double>(s);
  if (!v) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be 'auto' or a number");
  return *v;
}

Vector parse_vector(const std::string& s, const char* what) {
  const auto v = detail::parse_list(s, what);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> parse_grid(const std::string& s) { return detail::parse_list(s, "--t"); }

WeightLaw parse_weight_law(const std::string& s) {
  if (s == "exponential") return WeightLaw::Exponential;
  if (s == "gaussian") return WeightLaw::Gaussian;
  throw Error(ErrorKind::InvalidArgument, "weight law must be exponential or gaussian");
}

std::vector<Vector> parse_curve_z(const std::vector<std::string>& items, std::size_t q) {
  std::vector<Vector> out;
  for (const auto& s : items) {
    Vector z = parse_vector(s, "--curve-z");
    if (static_cast<std::size_t>(z.size()) != q) {
      throw Error(ErrorKind::InconsistentCovariateDim,
                  "--curve-z '" + s + "' has " + std::to_string(z.size()) + " entries, data has " + std::to_string(q));
    }
    out.push_back(std::move(z));
  }
  return out;
}

void report_warnings(const std::vector<Warning>& ws) {
  for (const auto& w : ws) std::cerr << "warning: " << w.code << ": " << w.message << '\n';
}

struct FitArgs {
  std::string data, model = "right-cs", tau = "auto", rho = "auto", out;
  std::vector<std::string> curve_z;
};

FitConfig make_config(const FitArgs& a, Model model) {
  FitConfig cfg;
  const auto tau = parse_bound(a.tau, "--tau");
  const auto rho = parse_bound(a.rho, "--rho");
  if (model == Model::RightCS && rho) throw Error(ErrorKind::InvalidArgument, "--rho applies to left-cs");
  if (model == Model::LeftCS && tau) throw Error(ErrorKind::InvalidArgument, "--tau applies to right-cs");
  cfg.tau = tau;
  cfg.rho = rho;
  return cfg;
}

int cmd_fit(const FitArgs& a) {
  const Model model = parse_model(a.model);
  const FitConfig cfg = make_config(a, model);
  const Dataset ds = read_dataset(a.data, model);
  const auto curve_z = parse_curve_z(a.curve_z, ds.dim());
  const FitResult f = fit(ds, cfg);
  write_results(f, nullptr, a.out, curve_z);
  report_warnings(f.warnings);
  std::cout << "wrote " << (fs::path(a.out) / "result.json").string() << '\n';
  return f.converged ? kOk : kNonConvergence;
}

struct BootArgs {
  FitArgs fit;
  std::size_t replicates = 0;
  std::uint64_t seed = 1;
  std::string law = "exponential";
  double level = 0.95;
};

int cmd_bootstrap(const BootArgs& a) {
  if (a.replicates < 50) {
    throw Error(ErrorKind::InsufficientReplicates, "-B must be at least 50 for percentile intervals, got " +
                                                       std::to_string(a.replicates));
  }
  if (!(a.level > 0.0 && a.level < 1.0)) throw Error(ErrorKind::InvalidArgument, "--level must lie in (0, 1)");
  const Model model = parse_model(a.fit.model);
  const FitConfig cfg = make_config(a.fit, model);
  const WeightLaw law = parse_weight_law(a.law);
  const Dataset ds = read_dataset(a.fit.data, model);
  const auto curve_z = parse_curve_z(a.fit.curve_z, ds.dim());
  const FitResult f = fit(ds, cfg);
  BootstrapOptions opts;
  opts.replicates = a.replicates;
  opts.seed = a.seed;
  opts.law = law;
  opts.curve_z = curve_z;
  const MultiplierDraws draws = bootstrap(ds, cfg, f, opts);
  write_results(f, &draws, a.fit.out, curve_z, a.level);
  write_replicates(draws, fs::path(a.fit.out) / "replicates.csv");
  report_warnings(f.warnings);
  report_warnings(draws.warnings);
  std::cout << "wrote " << (fs::path(a.fit.out) / "result.json").string() << '\n';
  return f.converged ? kOk : kNonConvergence;
}

int cmd_simulate(const std::string& spec_path, const std::string& out) {
  const ScenarioSpec spec = read_scenario(spec_path);
  write_dataset(simulate(spec), out);
  std::cout << "wrote " << out << '\n';
  return kOk;
}

struct StudyArgs {
  std::string spec, grid = "200,500,2000", out, tau = "auto", rho = "auto";
  std::size_t reps = 200;
  std::size_t bootstrap = 0;
  double level = 0.95;
};

int cmd_mc_study(const StudyArgs& a) {
  const ScenarioSpec spec = read_scenario(a.spec);
  std::vector<std::size_t> grid;
  for (double v : detail::parse_list(a.grid, "--grid-n")) {
    if (!(v >= 2.0) || v != std::floor(v)) throw Error(ErrorKind::InvalidArgument, "--grid-n entries must be integers >= 2");
    grid.push_back(static_cast<std::size_t>(v));
  }
  if (a.reps < 1) throw Error(ErrorKind::InvalidArgument, "--reps must be >= 1");
  if (a.bootstrap > 0 && a.bootstrap < 50) throw Error(ErrorKind::InvalidArgument, "--bootstrap must be 0 or >= 50");
  StudyOptions opts;
  opts.reps = a.reps;
  opts.bootstrap_replicates = a.bootstrap;
  opts.level = a.level;
  opts.config.tau = parse_bound(a.tau, "--tau");
  opts.config.rho = parse_bound(a.rho, "--rho");
  const auto rows = run_study(spec, grid, opts);

  const Eigen::Index q = spec.beta0.size();
  std::string header = "n,reps,failed,nonconverged,mean_p";
  for (Eigen::Index j = 1; j <= q; ++j) header += ",bias_beta" + std::to_string(j) + ",sd_beta" + std::to_string(j);
  header += ",mean_norm_error,mean_sup_hazard_error";
  if (a.bootstrap > 0) {
    for (Eigen::Index j = 1; j <= q; ++j) header += ",coverage_beta" + std::to_string(j) + ",boot_sd_beta" + std::to_string(j);
  }
  std::string table = header + "\n";
  for (const auto& r : rows) {
    table += std::to_string(r.n) + ',' + std::to_string(r.reps) + ',' + std::to_string(r.failed) + ',' +
             std::to_string(r.nonconverged) + ',' + format_number(r.mean_p);
    for (Eigen::Index j = 0; j < q; ++j) table += ',' + format_number(r.bias[j]) + ',' + format_number(r.sd[j]);
    table += ',' + format_number(r.mean_norm_error) + ',' + format_number(r.mean_sup_error);
    if (a.bootstrap > 0) {
      for (Eigen::Index j = 0; j < q; ++j) {
        table += ',' + format_number(r.coverage[j]) + ',' + format_number(r.mean_boot_sd[j]);
      }
    }
    table += '\n';
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + a.out + ": " + ec.message());
  {
    auto f = detail::open_out(fs::path(a.out) / "summary.csv");
    f << table;
  }
  std::cout << table;
  return kOk;
}

int cmd_oracle(const std::string& spec_path, const std::string& t_grid, const std::string& z_text) {
  const ScenarioSpec spec = read_scenario(spec_path);
  const Vector z = z_text.empty() ? Vector(Vector::Zero(spec.beta0.size())) : parse_vector(z_text, "--z");
  std::cout << "t,baseline_cumulative,baseline_cumulative_quadrature,lifetime_curve,risk_denominator,H0,H1,H2\n";
  for (double t : parse_grid(t_grid)) {
    const PopulationQuantities pq = population_oracle(spec, t, z);
    std::cout << format_number(t) << ',' << format_number(pq.baseline_cumulative) << ','
              << format_number(pq.baseline_cumulative_quadrature) << ',' << format_number(pq.lifetime_curve) << ','
              << format_number(pq.risk_denominator);
    for (double h : pq.sub_distribution) std::cout << ',' << format_number(h);
    std::cout << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cox regression for current-status data with right or left censoring"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write result files");
  fit_cmd->add_option("--data", fa.data, "data file (x,a,z1,...,zq)")->required();
  fit_cmd->add_option("--model", fa.model, "right-cs or left-cs")->required();
  fit_cmd->add_option("--tau", fa.tau, "right-cs truncation point or 'auto'");
  fit_cmd->add_option("--rho", fa.rho, "left-cs truncation point or 'auto'");
  fit_cmd->add_option("--out", fa.out, "output directory")->required();
  fit_cmd->add_option("--curve-z", fa.curve_z, "covariate value 'v1,...,vq' for a curve table (repeatable)");

  BootArgs ba;
  auto* boot_cmd = app.add_subcommand("bootstrap", "fit, then multiplier-bootstrap confidence bands");
  boot_cmd->add_option("--data", ba.fit.data, "data file")->required();
  boot_cmd->add_option("--model", ba.fit.model, "right-cs or left-cs")->required();
  boot_cmd->add_option("--tau", ba.fit.tau, "right-cs truncation point or 'auto'");
  boot_cmd->add_option("--rho", ba.fit.rho, "left-cs truncation point or 'auto'");
  boot_cmd->add_option("--out", ba.fit.out, "output directory")->required();
  boot_cmd->add_option("--curve-z", ba.fit.curve_z, "covariate value for a curve table (repeatable)");
  boot_cmd->add_option("-B,--replicates", ba.replicates, "bootstrap replicates (>= 50)")->required();
  boot_cmd->add_option("--seed", ba.seed, "random seed");
  boot_cmd->add_option("--weight-law", ba.law, "exponential or gaussian");
  boot_cmd->add_option("--level", ba.level, "confidence level");

  std::string sim_spec, sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "draw a dataset from a scenario file");
  sim_cmd->add_option("--spec", sim_spec, "scenario file")->required();
  sim_cmd->add_option("--out", sim_out, "output data file")->required();

  StudyArgs sa;
  auto* mc_cmd = app.add_subcommand("mc-study", "Monte Carlo study over a grid of sample sizes");
  mc_cmd->add_option("--spec", sa.spec, "scenario file")->required();
  mc_cmd->add_option("--reps", sa.reps, "replicates per sample size");
  mc_cmd->add_option("--grid-n", sa.grid, "sample sizes, comma separated");
  mc_cmd->add_option("--out", sa.out, "output directory")->required();
  mc_cmd->add_option("--bootstrap", sa.bootstrap, "bootstrap replicates per dataset (0: none)");
  mc_cmd->add_option("--level", sa.level, "confidence level for coverage");
  mc_cmd->add_option("--tau", sa.tau, "right-cs truncation point or 'auto'");
  mc_cmd->add_option("--rho", sa.rho, "left-cs truncation point or 'auto'");

  std::string or_spec, or_t, or_z;
  auto* or_cmd = app.add_subcommand("oracle", "population quantities of a scenario");
  or_cmd->add_option("--spec", or_spec, "scenario file")->required();
  or_cmd->add_option("--t", or_t, "time points, comma separated")->required();
  or_cmd->add_option("--z", or_z, "covariate value (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fa);
    if (*boot_cmd) return cmd_bootstrap(ba);
    if (*sim_cmd) return cmd_simulate(sim_spec, sim_out);
    if (*mc_cmd) return cmd_mc_study(sa);
    if (*or_cmd) return cmd_oracle(or_spec, or_t, or_z);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
