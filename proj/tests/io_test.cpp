#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cscox;
using namespace testing_util;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cscox_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

ScenarioSpec spec(Model m) {
  ScenarioSpec s;
  s.model = m;
  s.n = 150;
  s.p0 = 0.7;
  s.beta0 = vec({0.5, -0.5});
  s.baseline = Law::weibull(1.5, 1.0);
  s.censoring = Law::exponential(m == Model::RightCS ? 0.35 : 2.0);
  s.covariates = CovariateLaw::uniform(-1.5, 1.5);
  s.seed = 12;
  return s;
}

}  // namespace

TEST(ReadDataset, ThreeRows) {
  const Dataset ds = parse_dataset("x,a,z1\n1.0,0,0.5\n2.0,1,-0.5\n3.0,2,0\n", Model::RightCS);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.statuses(), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(ds.z(1)[0], -0.5);
}

TEST(ReadDataset, SchemaErrors) {
  EXPECT_CSCOX_ERROR(parse_dataset("x,a\n1,0\n", Model::RightCS), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z2\n1,0,0\n", Model::RightCS), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z1\n1,0\n", Model::RightCS), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z1\n1,0,abc\n", Model::RightCS), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z1\n", Model::RightCS), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_dataset("", Model::RightCS), ErrorKind::SchemaError);
  try {
    parse_dataset("x,a,z1\n1,0,0\n1,2.5,0\n", Model::RightCS, "d.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("d.csv"), std::string::npos);
    EXPECT_NE(msg.find("row 3"), std::string::npos);
    EXPECT_NE(msg.find("column a"), std::string::npos);
  }
}

TEST(ReadDataset, ValidationStillApplies) {
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z1\n1,3,0\n", Model::RightCS), ErrorKind::BadStatusCode);
  EXPECT_CSCOX_ERROR(parse_dataset("x,a,z1\n1,1,0\n", Model::RightCS), ErrorKind::NoUncensoredEvents);
}

TEST(ReadDataset, MissingFile) {
  try {
    read_dataset("/nonexistent/cscox/data.csv", Model::RightCS);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cscox/data.csv"), std::string::npos);
  }
}

TEST(ReadDataset, RoundTrip) {
  const Dataset ds = simulate(spec(Model::LeftCS));
  const fs::path dir = scratch("roundtrip");
  write_dataset(ds, dir / "d.csv");
  const Dataset again = read_dataset(dir / "d.csv", Model::LeftCS);
  EXPECT_EQ(ds.durations(), again.durations());
  EXPECT_EQ(ds.statuses(), again.statuses());
  EXPECT_EQ(ds.covariates(), again.covariates());
  EXPECT_EQ(first_line(dir / "d.csv"), "x,a,z1,z2");
}

TEST(WriteResults, FitOnlyHasNoIntervalColumns) {
  const Dataset ds = simulate(spec(Model::RightCS));
  const FitResult f = fit(ds);
  const fs::path dir = scratch("fitonly");
  write_results(f, nullptr, dir, {vec({0.0, 0.0})});
  EXPECT_EQ(first_line(dir / "hazard.csv"), "time,increment,cumulative");
  EXPECT_EQ(first_line(dir / "curve_1.csv"), "time,value");
  const auto doc = nlohmann::json::parse(slurp(dir / "result.json"));
  EXPECT_FALSE(doc.contains("bootstrap"));
  EXPECT_EQ(doc.at("model"), "right-cs");
  EXPECT_EQ(doc.at("hazard_jumps").get<std::size_t>(), f.hazard.size());
  EXPECT_EQ(doc.at("curves")[0].at("file"), "curve_1.csv");
}

TEST(WriteResults, BootstrapAddsIntervals) {
  const Dataset ds = simulate(spec(Model::LeftCS));
  const FitResult f = fit(ds);
  BootstrapOptions o;
  o.replicates = 50;
  o.seed = 5;
  o.curve_z = {vec({0.0, 0.0})};
  const MultiplierDraws d = bootstrap(ds, {}, f, o);
  const fs::path dir = scratch("boot");
  write_results(f, &d, dir, o.curve_z, 0.9);
  write_replicates(d, dir / "replicates.csv");
  EXPECT_EQ(first_line(dir / "hazard.csv"), "time,increment,cumulative,lower,upper");
  EXPECT_EQ(first_line(dir / "curve_1.csv"), "time,value,lower,upper");
  EXPECT_EQ(first_line(dir / "replicates.csv"), "replicate,failed,p,beta1,beta2");
  const auto doc = nlohmann::json::parse(slurp(dir / "result.json"));
  const auto& b = doc.at("bootstrap");
  EXPECT_EQ(b.at("replicates").get<std::size_t>(), 50u);
  EXPECT_EQ(b.at("seed").get<std::uint64_t>(), 5u);
  EXPECT_EQ(b.at("weight_law"), "exponential");
  EXPECT_EQ(b.at("level").get<double>(), 0.9);
  EXPECT_EQ(b.at("beta_intervals").size(), 2u);
}

TEST(WriteResults, HazardAndDocumentRoundTrip) {
  for (Model m : {Model::RightCS, Model::LeftCS}) {
    const Dataset ds = simulate(spec(m));
    const FitResult f = fit(ds);
    const fs::path dir = scratch("hazard");
    write_results(f, nullptr, dir);
    const StepFunction h = read_hazard_table(dir / "hazard.csv");
    EXPECT_EQ(h.times(), f.hazard.times());
    EXPECT_EQ(h.increments(), f.hazard.increments());
    const ResultDocument r = read_result_document(dir / "result.json");
    EXPECT_EQ(r.model, m);
    EXPECT_EQ(r.n, ds.size());
    EXPECT_EQ(r.theta_hat.p, f.theta_hat.p);
    EXPECT_EQ(r.theta_hat.beta, f.theta_hat.beta);
    EXPECT_EQ(r.truncation, f.truncation);
    EXPECT_EQ(r.loglik_at_max, f.loglik_at_max);
    EXPECT_EQ(r.converged, f.converged);
    EXPECT_EQ(r.warnings.size(), f.warnings.size());
  }
}

TEST(WriteResults, BadDocument) {
  const fs::path dir = scratch("baddoc");
  std::ofstream(dir / "result.json") << "{\"model\": 3}";
  EXPECT_CSCOX_ERROR(read_result_document(dir / "result.json"), ErrorKind::SchemaError);
}

TEST(Scenario, ParseKeysAndComments) {
  const ScenarioSpec s = parse_scenario(
      "# pilot\nmodel = left-cs\nn = 300\np0 = 0.8\nbeta0 = 0.5, -0.25\n"
      "baseline = piecewise\nbaseline.breaks = 1, 2\nbaseline.rates = 0.5, 1, 0.2\n"
      "censoring = weibull  # heavier tail\ncensoring.shape = 2\ncensoring.scale = 1.5\n"
      "covariates = levels\ncovariates.levels = -1, 0, 1\nzero_mass = 0.1\nseed = 9\n");
  EXPECT_EQ(s.model, Model::LeftCS);
  EXPECT_EQ(s.n, 300u);
  EXPECT_EQ(s.p0, 0.8);
  EXPECT_EQ(s.beta0, vec({0.5, -0.25}));
  EXPECT_EQ(s.baseline.kind, Law::Kind::PiecewiseConstant);
  EXPECT_EQ(s.baseline.rates, (std::vector<double>{0.5, 1.0, 0.2}));
  EXPECT_EQ(s.censoring.kind, Law::Kind::Weibull);
  EXPECT_EQ(s.censoring.scale, 1.5);
  EXPECT_EQ(s.covariates.levels, (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(s.zero_mass, 0.1);
  EXPECT_EQ(s.seed, 9u);
}

TEST(Scenario, FormatRoundTrip) {
  for (Model m : {Model::RightCS, Model::LeftCS}) {
    ScenarioSpec s = spec(m);
    if (m == Model::RightCS) {
      s.baseline = Law::piecewise({2.0}, {0.6, 0.0});
      s.cure_mass = 0.3;
    }
    const ScenarioSpec t = parse_scenario(format_scenario(s));
    EXPECT_EQ(format_scenario(t), format_scenario(s));
    EXPECT_EQ(simulate(t).durations(), simulate(s).durations());
  }
}

TEST(Scenario, Errors) {
  EXPECT_CSCOX_ERROR(parse_scenario("n = 10\n"), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_scenario("model = middle\nbeta0 = 1\n"), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_scenario("model = right-cs\nbeta0 = 1\nbaseline = gamma\n"), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_scenario("model = right-cs\nbeta0 = one\n"), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(parse_scenario("model = right-cs\nbeta0 = 1\nno equals sign\n"), ErrorKind::SchemaError);
  EXPECT_CSCOX_ERROR(read_scenario("/nonexistent/s.cfg"), ErrorKind::IoError);
}
