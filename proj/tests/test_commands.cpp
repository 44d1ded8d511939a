#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "optflow/commands.hpp"
#include "optflow/scenario.hpp"

using namespace optflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "optflow_test_commands" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path write_scenario(const fs::path& dir, const std::string& name, const Scenario& s) {
  const fs::path p = dir / name;
  save_scenario(s, p);
  return p;
}

}  // namespace

TEST_CASE("gen writes deterministic scenarios") {
  std::ostringstream a, b, err;
  CHECK(cmd_gen(GenOptions{"random", 5, 3, 77, 2.0, 1.0, "-"}, a, err) == kExitOk);
  CHECK(cmd_gen(GenOptions{"random", 5, 3, 77, 2.0, 1.0, "-"}, b, err) == kExitOk);
  CHECK(a.str() == b.str());
  CHECK(a.str() == to_yaml(make_random_feasible(5, 3, 77)));

  const fs::path dir = scratch("gen");
  CHECK(cmd_gen(GenOptions{"ijc", 3, 2, 1, 3.0, 1.0, dir / "ijc.yaml"}, a, err) == kExitOk);
  CHECK(to_yaml(load_scenario(dir / "ijc.yaml")) == to_yaml(make_reference_ijc(3, 2, 1, 3.0)));
  std::ostringstream e2;
  CHECK(cmd_gen(GenOptions{"spiral", 3, 2, 1, 2.0, 1.0, "-"}, a, e2) == kExitInvalidInput);
  CHECK(e2.str().find("spiral") != std::string::npos);
}

TEST_CASE("certify exit codes") {
  const fs::path dir = scratch("certify");
  const fs::path u = write_scenario(dir, "ujsc.yaml", make_reference_ujsc(4, 2, 7));
  const fs::path c = write_scenario(dir, "counter.yaml", make_counterexample(0));
  const fs::path g = write_scenario(dir, "ijc.yaml", make_reference_ijc(4, 2, 7, 2.0));
  std::ostringstream out, err;

  CHECK(cmd_certify(CertifyOptions{u, std::nullopt, Condition::Ujsc}, out, err) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["pass"] == true);
  CHECK(j["scenario_hash"] == scenario_hash(make_reference_ujsc(4, 2, 7)));
  CHECK(j["reports"][0]["condition"] == "UJSC");

  std::ostringstream o2;
  CHECK(cmd_certify(CertifyOptions{u, 2.0, Condition::Ujsc}, o2, err) == kExitCheckFailed);
  CHECK(nlohmann::json::parse(o2.str())["reports"][0]["first_failure"].is_array());

  // directed pieces: IJC is not applicable, so "all" fails while "any" passes
  std::ostringstream o3, o4;
  CHECK(cmd_certify(CertifyOptions{u, std::nullopt, Condition::Any}, o3, err) == kExitOk);
  CHECK(cmd_certify(CertifyOptions{u, std::nullopt, Condition::All}, o4, err) == kExitCheckFailed);

  std::ostringstream o5, o6;
  CHECK(cmd_certify(CertifyOptions{g, std::nullopt, Condition::Ijc}, o5, err) == kExitOk);
  CHECK(cmd_certify(CertifyOptions{c, std::nullopt, Condition::Any}, o6, err) == kExitCheckFailed);

  std::ostringstream o7, e7;
  CHECK(cmd_certify(CertifyOptions{dir / "missing.yaml"}, o7, e7) == kExitInvalidInput);
  CHECK(cmd_certify(CertifyOptions{u, -1.0}, o7, e7) == kExitInvalidInput);
}

TEST_CASE("run on the UJSC reference converges") {
  const fs::path dir = scratch("run_ujsc");
  const fs::path u = write_scenario(dir, "ujsc.yaml", make_reference_ujsc(4, 2, 7));
  std::ostringstream out, err;
  REQUIRE(cmd_run(RunOptions{u, dir / "a"}, out, err) == kExitOk);
  for (const char* f : {"trajectory.csv", "metrics.json", "summary.csv", "certification.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  const auto metrics = read_json(dir / "a" / "metrics.json");
  CHECK(metrics["converged_at"].is_number());
  CHECK(metrics["monotonicity_violations"].empty());
  const auto manifest = read_json(dir / "a" / "manifest.json");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["scenario_hash"] == metrics["scenario_hash"]);
  CHECK(read_json(dir / "a" / "certification.json")["connected"] == true);

  // a rerun reproduces every data file byte for byte
  std::ostringstream o2, e2;
  REQUIRE(cmd_run(RunOptions{u, dir / "b"}, o2, e2) == kExitOk);
  for (const char* f : {"trajectory.csv", "metrics.json", "summary.csv", "certification.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("run rejects invalid and disconnected scenarios") {
  const fs::path dir = scratch("run_bad");
  Scenario disjoint = make_counterexample(0);
  disjoint.sets[1] = Ball{Eigen::Vector2d(3, 0), 1.0};
  const fs::path d = write_scenario(dir, "disjoint.yaml", disjoint);
  std::ostringstream out, err;
  CHECK(cmd_run(RunOptions{d, dir / "d"}, out, err) == kExitInvalidInput);
  CHECK(err.str().find("A3_feasibility") != std::string::npos);

  const fs::path c = write_scenario(dir, "counter.yaml", make_counterexample(0));
  std::ostringstream o2, e2;
  CHECK(cmd_run(RunOptions{c, dir / "c"}, o2, e2) == kExitInvalidInput);
  CHECK(e2.str().find("--allow-disconnected") != std::string::npos);

  RunOptions forced{c, dir / "c2"};
  forced.allow_disconnected = true;
  std::ostringstream o3, e3;
  CHECK(cmd_run(forced, o3, e3) == kExitOk);
  const auto metrics = read_json(dir / "c2" / "metrics.json");
  CHECK(metrics["converged_at"].is_null());
  CHECK(metrics["terminal"]["diameter"].get<double>() >= 1.9);

  std::ostringstream o4, e4;
  CHECK(cmd_run(RunOptions{dir / "nope.yaml", dir / "n"}, o4, e4) == kExitInvalidInput);
}

TEST_CASE("suite command") {
  const fs::path dir = scratch("suite");
  std::ostringstream out, err;
  CHECK(cmd_suite(SuiteCommandOptions{"no-such-suite", dir, 1}, out, err) == kExitInvalidInput);
  std::ostringstream o2, e2;
  CHECK(cmd_suite(SuiteCommandOptions{"analytic", dir, 1}, o2, e2) == kExitOk);
  const auto card = read_json(dir / "analytic.scorecard.json");
  CHECK(card["schema_version"] == 1);
  CHECK(card["suite"] == "analytic");
  CHECK(card["pass"] == true);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(o2.str().find("suite analytic: PASS") != std::string::npos);
}

TEST_CASE("output directory comes from the environment") {
  const fs::path dir = scratch("env");
  CHECK(resolve_output_dir(dir / "explicit") == dir / "explicit");
  ::setenv(kOutputDirEnv, (dir / "from_env").c_str(), 1);
  CHECK(resolve_output_dir(std::nullopt) == dir / "from_env");
  std::ostringstream out, err;
  CHECK(cmd_suite(SuiteCommandOptions{"analytic", std::nullopt, 1}, out, err) == kExitOk);
  CHECK(fs::exists(dir / "from_env" / "analytic.scorecard.json"));
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir(std::nullopt) == fs::path("optflow-out"));
}
