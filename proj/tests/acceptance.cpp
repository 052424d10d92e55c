// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cscox/cscox.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cscox;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [x]");
  }
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ScenarioSpec weibull_scenario(Model m) {
  ScenarioSpec s;
  s.model = m;
  s.p0 = 0.7;
  s.beta0 = vec({0.5, -0.5});
  s.baseline = Law::weibull(1.5, 1.0);
  s.censoring = Law::exponential(m == Model::RightCS ? 0.35 : 2.0);
  s.covariates = CovariateLaw::uniform(-1.5, 1.5);
  s.seed = 20240601;
  return s;
}

FitConfig window(Model m) {
  FitConfig cfg;
  if (m == Model::RightCS) cfg.tau = 1.2;
  else cfg.rho = 0.4;
  return cfg;
}

// ---------------------------------------------------------------------------

Outcome cox_reduction() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst_beta = 0.0, worst_hazard = 0.0;
  bool all_converged = true;
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = oracle::classical_right(rng, 200, vec({0.8, -0.4}));
    const FitResult f = fit(validate(r, Model::RightCS));
    all_converged = all_converged && f.converged && f.theta_hat.p == 1.0;
    const oracle::Cox cox = oracle::cox_from(r);
    const Vector b = cox.mle(Vector::Zero(2));
    worst_beta = std::max(worst_beta, (f.theta_hat.beta - b).cwiseAbs().maxCoeff());
    for (auto [t, d] : cox.breslow(f.theta_hat.beta)) {
      worst_hazard = std::max(worst_hazard, std::abs(f.hazard.jump_at(t) - d));
    }
  }
  o.check(all_converged, "20 fits converged with p-hat = 1");
  o.check(worst_beta <= 1e-6, "max |beta - cox| = " + num(worst_beta));
  o.check(worst_hazard <= 1e-10, "max |jump - breslow| = " + num(worst_hazard));
  return o;
}

FitConfig zero_box() {
  FitConfig cfg;
  cfg.beta_lower = 0.0;
  cfg.beta_upper = 0.0;
  return cfg;
}

// Nelson-Aalen increments of the records, in time order.
std::vector<double> na_increments(const std::vector<Observation>& r) {
  const Dataset ds = validate(r, Model::RightCS);
  std::vector<double> out;
  double prev = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.status(i) != 0 || (i + 1 < ds.size() && ds.x(i + 1) == ds.x(i) && ds.status(i + 1) == 0)) continue;
    const double v = oracle::nelson_aalen(ds.durations(), ds.statuses(), ds.x(i));
    out.push_back(v - prev);
    prev = v;
  }
  return out;
}

Outcome nelson_aalen_right() {
  Outcome o;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = oracle::classical_right(rng, 150, vec({0.6, 0.3}));
    const Dataset ds = validate(r, Model::RightCS);
    const FitResult f = fit(ds, zero_box());
    for (double t : f.hazard.times()) {
      worst = std::max(worst, std::abs(f.hazard(t) - oracle::nelson_aalen(ds.durations(), ds.statuses(), t)));
    }
  }
  o.check(worst <= 1e-12, "10 datasets, max |cumulative - NA| = " + num(worst));
  return o;
}

Outcome nelson_aalen_left() {
  Outcome o;
  std::mt19937_64 rng(103);
  double worst = 0.0;
  bool shapes = true;
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = oracle::classical_right(rng, 150, vec({0.6, 0.3}));
    const FitResult f = fit(validate(oracle::reflect(r, 100.0), Model::LeftCS), zero_box());
    const std::vector<double> na = na_increments(r);
    auto inc = f.hazard.increments();
    std::reverse(inc.begin(), inc.end());
    shapes = shapes && inc.size() == na.size() && f.theta_hat.p == 1.0;
    for (std::size_t k = 0; k < std::min(inc.size(), na.size()); ++k) worst = std::max(worst, std::abs(inc[k] - na[k]));
  }
  o.check(shapes, "reverse-hazard jumps line up with reflected NA jumps");
  o.check(worst <= 1e-12, "10 datasets, max |jump - NA jump| = " + num(worst));
  return o;
}

double finite_difference_worst(Model m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Dataset ds = validate(oracle::random_records(rng, 40 + rep, 2), m);
    const double p = 0.1 + 0.9 * u(rng);
    const Vector b = vec({4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0});
    const double bound = resolve_truncation(ds, {});
    const Vector g = evaluate(ds, p, b, bound).gradient;
    for (Eigen::Index j = 0; j < 2; ++j) {
      // Richardson-extrapolated central difference
      auto central = [&](double h) {
        Vector up = b, dn = b;
        up[j] += h;
        dn[j] -= h;
        return (evaluate(ds, p, up, bound, false).value - evaluate(ds, p, dn, bound, false).value) / (2 * h);
      };
      const double fd = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
      worst = std::max(worst, std::abs(g[j] - fd) / std::max(std::abs(fd), 1e-3));
    }
  }
  return worst;
}

Outcome gradient_right() {
  Outcome o;
  const double w = finite_difference_worst(Model::RightCS, 104);
  o.check(w < 1e-5, "50 triples, max relative error = " + num(w));
  return o;
}

struct Consistency {
  std::vector<StudyRow> rows;
  double closed_vs_quadrature = 0.0;
};

Consistency consistency_study(Model m) {
  Consistency c;
  ScenarioSpec s = weibull_scenario(m);
  StudyOptions opts;
  opts.reps = 200;
  opts.config = window(m);
  c.rows = run_study(s, {200, 500, 2000}, opts);
  // Closed-form baseline against the quadrature route across the window.
  s.n = 1;
  const double lo = m == Model::RightCS ? 0.05 : 0.4, hi = m == Model::RightCS ? 1.2 : 3.0;
  for (int k = 0; k <= 40; ++k) {
    const double t = lo + (hi - lo) * k / 40.0;
    const PopulationQuantities q = population_oracle(s, t, Vector::Zero(2));
    c.closed_vs_quadrature = std::max(c.closed_vs_quadrature, std::abs(q.baseline_cumulative - q.baseline_cumulative_quadrature));
  }
  return c;
}

Outcome judge_consistency(const Consistency& c) {
  Outcome o;
  const auto& r = c.rows;
  std::string norms;
  for (const auto& row : r) norms += (norms.empty() ? "" : " > ") + num(row.mean_norm_error);
  o.check(r[0].mean_norm_error > r[1].mean_norm_error && r[1].mean_norm_error > r[2].mean_norm_error,
          "mean |beta - beta0|: " + norms);
  o.check(r[2].mean_norm_error < 0.08, "n=2000 norm error " + num(r[2].mean_norm_error) + " < 0.08");
  o.check(std::abs(r[2].mean_p - 0.7) < 0.02, "n=2000 mean p-hat " + num(r[2].mean_p));
  o.check(r[2].mean_sup_error < 0.1, "n=2000 mean sup baseline error " + num(r[2].mean_sup_error) + " < 0.1");
  o.check(r[2].bias.cwiseAbs().maxCoeff() < 0.05, "n=2000 max |bias| " + num(r[2].bias.cwiseAbs().maxCoeff()));
  o.check(c.closed_vs_quadrature < 1e-6, "baseline closed form vs quadrature " + num(c.closed_vs_quadrature));
  std::size_t failed = 0;
  for (const auto& row : r) failed += row.failed;
  o.check(failed == 0, std::to_string(failed) + " failed fits");
  return o;
}

Outcome bootstrap_validity() {
  Outcome o;
  const ScenarioSpec s = weibull_scenario(Model::RightCS);
  StudyOptions opts;
  opts.reps = 200;
  opts.bootstrap_replicates = 300;
  opts.config = window(Model::RightCS);
  const StudyRow row = run_study(s, {500}, opts).front();
  for (Eigen::Index j = 0; j < 2; ++j) {
    const double cov = row.coverage[j];
    o.check(cov >= 0.90 && cov <= 0.99, "coverage beta" + std::to_string(j + 1) + " " + num(cov));
  }
  const double ratio = row.mean_boot_sd[0] / row.sd[0];
  o.check(std::abs(ratio - 1.0) <= 0.25,
          "boot sd " + num(row.mean_boot_sd[0]) + " vs MC sd " + num(row.sd[0]) + " (ratio " + num(ratio) + ")");
  o.check(row.failed == 0, std::to_string(row.failed) + " failed datasets");
  return o;
}

Outcome cure_rate_estimation() {
  Outcome o;
  ScenarioSpec s;
  s.model = Model::RightCS;
  s.n = 2000;
  s.p0 = 0.7;
  s.beta0 = vec({0.5, -0.5});
  s.baseline = Law::piecewise({2.0}, {0.6, 0.0});
  s.cure_mass = 0.3;
  s.censoring = Law::exponential(1.0 / 3.0);
  s.covariates = CovariateLaw::uniform(-1.5, 1.5);
  s.seed = 20240602;
  const LifetimeLaw truth(s);
  o.check(std::abs(truth.survival(1e9, Vector::Zero(2)) - 0.3) < 1e-12, "population cure rate at z=0 is 0.3");
  std::vector<double> est(200, std::nan(""));
  parallel_for(est.size(), worker_count(0), [&](std::size_t r) {
    try {
      const FitResult f = fit(simulate(s, r));
      est[r] = cure_rate(f, Vector::Zero(2));
    } catch (const Error&) {
    }
  });
  double sum = 0.0, used = 0.0;
  for (double v : est) {
    if (std::isnan(v)) continue;
    sum += v;
    used += 1.0;
  }
  const double mean = sum / used;
  o.check(used == 200.0, num(used, 3) + " of 200 fits");
  o.check(std::abs(mean - 0.3) < 0.03, "mean cure-rate estimate " + num(mean) + ", |. - 0.3| < 0.03");
  return o;
}

Outcome left_mirror(const Consistency& c) {
  Outcome na = nelson_aalen_left();
  Outcome o;
  o.check(na.pass, "reduction: " + na.detail);
  const double w = finite_difference_worst(Model::LeftCS, 105);
  o.check(w < 1e-5, "gradient: 50 triples, max relative error " + num(w));
  const Outcome cons = judge_consistency(c);
  o.check(cons.pass, "consistency: " + cons.detail);
  return o;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "cscox_acceptance";
  fs::remove_all(root);
  const std::string cli = CSCOX_CLI_PATH;
  const char* right_cfg =
      "model = right-cs\nn = 400\np0 = 0.7\nbeta0 = 0.5, -0.5\nbaseline = weibull\nbaseline.shape = 1.5\n"
      "baseline.scale = 1\ncensoring = exponential\ncensoring.rate = 0.35\ncovariates = uniform\n"
      "covariates.lower = -1.5\ncovariates.upper = 1.5\nseed = 17\n";
  const char* left_cfg =
      "model = left-cs\nn = 400\np0 = 0.7\nbeta0 = 0.5, -0.5\nbaseline = weibull\nbaseline.shape = 1.5\n"
      "baseline.scale = 1\ncensoring = exponential\ncensoring.rate = 2\ncovariates = uniform\n"
      "covariates.lower = -1.5\ncovariates.upper = 1.5\nzero_mass = 0.05\nseed = 18\n";
  std::vector<std::string> files;
  bool ran = true;
  for (const std::string run : {"a", "b"}) {
    const fs::path d = root / run;
    fs::create_directories(d);
    std::ofstream(d / "right.cfg") << right_cfg;
    std::ofstream(d / "left.cfg") << left_cfg;
    auto go = [&](const std::string& args, const std::string& capture) {
      const int code = shell(cli + " " + args + " >" + (d / capture).string() + " 2>>" + (d / "stderr.txt").string());
      ran = ran && code == 0;
    };
    for (const std::string m : {"right", "left"}) {
      const std::string model = m + "-cs";
      go("simulate --spec " + (d / (m + ".cfg")).string() + " --out " + (d / (m + ".csv")).string(), "sim_" + m + ".txt");
      go("fit --data " + (d / (m + ".csv")).string() + " --model " + model + " --curve-z 0,0 --out " +
             (d / ("fit_" + m)).string(),
         "fit_" + m + ".txt");
      go("bootstrap --data " + (d / (m + ".csv")).string() + " --model " + model + " -B 60 --seed 5 --curve-z 0.5,-0.5 --out " +
             (d / ("boot_" + m)).string(),
         "boot_" + m + ".txt");
      go("mc-study --spec " + (d / (m + ".cfg")).string() + " --reps 4 --grid-n 100,200 --bootstrap 50 --out " +
             (d / ("mc_" + m)).string(),
         "mc_" + m + ".txt");
      go("oracle --spec " + (d / (m + ".cfg")).string() + " --t 0.5,1,1.5 --z 0.3,0.3", "oracle_" + m + ".txt");
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    files.push_back(fs::relative(e.path(), root / "a").string());
  }
  // stdout echoes output paths, which name the run directory
  auto contents = [&](const std::string& run, const std::string& f) {
    std::string s = slurp(root / run / f);
    const std::string dir = (root / run).string();
    for (std::size_t at = s.find(dir); at != std::string::npos; at = s.find(dir, at)) s.replace(at, dir.size(), "RUN");
    return s;
  };
  std::size_t differ = 0;
  for (const auto& f : files) differ += contents("a", f) != contents("b", f);
  o.check(ran, "every command exited 0");
  o.check(files.size() > 20 && differ == 0,
          std::to_string(files.size()) + " output files compared, " + std::to_string(differ) + " differ");
  return o;
}

}  // namespace

int main() {
  std::cout << "threads: " << worker_count(0) << std::endl;
  int failures = 0;
  auto report = [&](const char* id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << ' ' << name << " (" << num(secs, 3) << " s): " << o.detail
              << std::endl;
  };

  report("1", "cox-reduction", cox_reduction);
  report("2", "nelson-aalen-reduction", nelson_aalen_right);
  report("3", "gradient", gradient_right);
  report("4", "consistency-right", [] { return judge_consistency(consistency_study(Model::RightCS)); });
  report("5", "bootstrap-validity", bootstrap_validity);
  report("6", "cure-rate", cure_rate_estimation);
  report("7", "left-mirror", [] { return left_mirror(consistency_study(Model::LeftCS)); });
  report("8", "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
