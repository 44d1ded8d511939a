#include "optflow/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "optflow/metrics.hpp"
#include "optflow/scenario.hpp"
#include "optflow/suites.hpp"

namespace optflow {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write " + path.string());
  file << text;
  if (!file) throw InputError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::filesystem::path prepare_dir(const std::optional<std::filesystem::path>& requested) {
  const std::filesystem::path dir = resolve_output_dir(requested);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

CertificationReport ijc_or_not_applicable(const SwitchingTopology& topo) {
  if (topo.every_piece_symmetric()) return certify_ijc(topo);
  CertificationReport r;
  r.condition = "IJC";
  r.pass = false;
  r.note = "not applicable: some pieces have one-way arcs";
  return r;
}

nlohmann::json validation_json(const ValidationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"pass", report.all_pass()},
          {"feasibility_residual", report.feasibility_residual},
          {"boundedness_verified", report.boundedness_verified},
          {"checks", checks}};
}

void report_validation(const ValidationReport& report, std::ostream& err) {
  for (const auto& c : report.checks) {
    if (!c.pass) err << "validation: " << c.name << ": " << c.detail << "\n";
  }
}

}  // namespace

std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& requested) {
  if (requested && !requested->empty()) return *requested;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "optflow-out";
}

nlohmann::json to_json(const CertificationReport& report) {
  nlohmann::json j = {{"condition", report.condition},
                      {"pass", report.pass},
                      {"note", report.note},
                      {"partition", report.partition}};
  if (report.condition == "UJSC") {
    j["window"] = report.window;
    j["windows_checked"] = report.windows_checked;
  } else {
    j["complete_intervals"] = report.windows_checked;
  }
  j["first_failure"] = report.first_failure
                           ? nlohmann::json::array({report.first_failure->first, report.first_failure->second})
                           : nlohmann::json(nullptr);
  return j;
}

double default_window(const SwitchingTopology& topo) {
  double longest = 0.0;
  for (std::size_t k = 0; k < topo.pieces().size(); ++k) {
    longest = std::max(longest, topo.piece_end(k) - topo.pieces()[k].start);
  }
  return std::min(topo.horizon(), static_cast<double>(topo.node_count()) * longest);
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  Scenario s;
  try {
    s = load_scenario(options.scenario);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  const ValidationReport validation = validate_scenario(s);
  if (!validation.all_pass()) {
    report_validation(validation, err);
    return kExitInvalidInput;
  }

  std::filesystem::path dir;
  try {
    dir = prepare_dir(options.output_dir);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  const FlowModel model = build_model(s);
  const IntersectionOracle oracle = common_oracle(s);
  const double window = options.window.value_or(default_window(model.topology));
  if (!(window > 0.0)) {
    err << "error: --window must be positive\n";
    return kExitInvalidInput;
  }
  const CertificationReport ujsc = certify_ujsc(model.topology, window);
  const CertificationReport ijc = ijc_or_not_applicable(model.topology);
  const bool connected = ujsc.pass || ijc.pass;
  const nlohmann::json certification = {
      {"connected", connected}, {"ujsc", to_json(ujsc)}, {"ijc", to_json(ijc)}};
  write_json(dir / "certification.json", certification);
  out << fmt::format("connectivity: UJSC(T = {}) {}, IJC {}\n", window, ujsc.pass ? "PASS" : "FAIL",
                     ijc.pass ? "PASS" : "FAIL");
  if (!connected && !options.allow_disconnected) {
    err << "connectivity: neither UJSC nor IJC holds; rerun with --allow-disconnected to simulate anyway\n";
    return kExitInvalidInput;
  }

  int code = kExitOk;
  std::string failure;
  nlohmann::json checks = {{"validation", true}, {"ujsc", ujsc.pass}, {"ijc", ijc.pass}};
  std::vector<std::string> files = {"certification.json"};
  try {
    const Trajectory traj = simulate(model, s.initial, s.integrator);
    MetricsOptions mopts;
    mopts.step = s.integrator.step;
    mopts.convergence_tol = options.convergence_tol;
    const MetricsReport metrics = compute_metrics(traj, model, oracle, mopts);

    {
      std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
      write_trajectory_csv(csv, traj, s.sets, oracle);
      if (!csv) throw InputError("failed writing trajectory.csv");
    }
    nlohmann::json mj = to_json(metrics);
    mj["scenario_hash"] = scenario_hash(s);
    mj["samples"] = traj.size();
    mj["weights_observed"] = {
        {"min", traj.weight_min}, {"max", traj.weight_max}, {"evaluations", traj.weight_evaluations}};
    mj["validation"] = validation_json(validation);
    write_json(dir / "metrics.json", mj);
    write_text(dir / "summary.csv", summary_csv(metrics));
    files.insert(files.end(), {"trajectory.csv", "metrics.json", "summary.csv"});

    const bool monotone = metrics.monotonicity_violations.empty() && metrics.sublevel_holds();
    const bool contained = metrics.containment_flags() == 0;
    checks["d_monotone"] = monotone;
    checks["delta_containment"] = contained;
    checks["converged"] = metrics.converged_at.has_value();
    if (metrics.converged_at) {
      out << fmt::format("converged at t = {:.9f}\n", *metrics.converged_at);
    } else {
      out << "no convergence detected\n";
    }
    if (!monotone) {
      failure = fmt::format("invariant: d(t) increased beyond tol_mono = {:.3g} ({} violations)", metrics.tol_mono,
                            metrics.monotonicity_violations.size());
      code = kExitInvariantViolation;
    } else if (!contained) {
      failure = fmt::format("invariant: {} hull containment pairs exceed the allowance", metrics.containment_flags());
      code = kExitInvariantViolation;
    }
  } catch (const OracleFailure& e) {
    failure = std::string("oracle failure: ") + e.what();
    code = kExitOracleFailure;
  } catch (const InvariantViolation& e) {
    failure = std::string("invariant: ") + e.what();
    code = kExitInvariantViolation;
  } catch (const InputError& e) {
    failure = std::string("error: ") + e.what();
    code = kExitInvalidInput;
  }
  if (!failure.empty()) err << failure << "\n";

  files.push_back("manifest.json");
  const nlohmann::json manifest = {{"command", "run"},
                                   {"scenario", options.scenario.string()},
                                   {"scenario_hash", scenario_hash(s)},
                                   {"tool_version", kToolVersion},
                                   {"seed", s.seed},
                                   {"started_at", started},
                                   {"finished_at", utc_now()},
                                   {"outputs", files},
                                   {"checks", checks},
                                   {"exit_code", code}};
  write_json(dir / "manifest.json", manifest);
  return code;
}

int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = load_scenario(options.scenario);
    const SwitchingTopology topo = realize(s.topology, s.agents);
    const double window = options.window.value_or(default_window(topo));
    if (!(window > 0.0)) throw InputError("--window must be positive");

    nlohmann::json reports = nlohmann::json::array();
    std::optional<bool> ujsc;
    std::optional<bool> ijc;
    if (options.condition != Condition::Ijc) {
      const CertificationReport r = certify_ujsc(topo, window);
      ujsc = r.pass;
      reports.push_back(to_json(r));
    }
    if (options.condition != Condition::Ujsc) {
      const CertificationReport r = ijc_or_not_applicable(topo);
      ijc = r.pass;
      reports.push_back(to_json(r));
    }
    bool pass = false;
    switch (options.condition) {
      case Condition::Ujsc: pass = *ujsc; break;
      case Condition::Ijc: pass = *ijc; break;
      case Condition::Any: pass = *ujsc || *ijc; break;
      case Condition::All: pass = *ujsc && *ijc; break;
    }
    const nlohmann::json j = {{"scenario_hash", scenario_hash(s)}, {"pass", pass}, {"reports", reports}};
    out << j.dump(2) << "\n";
    return pass ? kExitOk : kExitCheckFailed;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

int cmd_suite(const SuiteCommandOptions& options, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), options.suite) == names.end()) {
    err << "error: unknown suite '" << options.suite << "'\n";
    return kExitInvalidInput;
  }
  std::filesystem::path dir;
  SuiteResult result;
  try {
    dir = prepare_dir(options.output_dir);
    result = run_suite(options.suite, SuiteOptions{options.threads});
  } catch (const OracleFailure& e) {
    err << "oracle failure: " << e.what() << "\n";
    return kExitOracleFailure;
  } catch (const InvariantViolation& e) {
    err << "invariant: " << e.what() << "\n";
    return kExitInvariantViolation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }

  for (const auto& c : result.checks) {
    out << fmt::format("{} {}: value {:.6g}, limit {:.6g} ({})\n", c.pass ? "PASS" : "FAIL", c.name, c.value, c.limit,
                       c.detail);
  }
  const std::string card = options.suite + ".scorecard.json";
  write_json(dir / card, scorecard(result));
  const int code = result.pass() ? kExitOk : kExitCheckFailed;
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& c : result.checks) checks[c.name] = c.pass;
  write_json(dir / "manifest.json", {{"command", "suite"},
                                     {"suite", options.suite},
                                     {"tool_version", kToolVersion},
                                     {"started_at", started},
                                     {"finished_at", utc_now()},
                                     {"outputs", {card, "manifest.json"}},
                                     {"checks", checks},
                                     {"exit_code", code}});
  out << fmt::format("suite {}: {}\n", options.suite, result.pass() ? "PASS" : "FAIL");
  return code;
}

int cmd_gen(const GenOptions& options, std::ostream& out, std::ostream& err) {
  try {
    Scenario s;
    if (options.kind == "ujsc") {
      s = make_reference_ujsc(options.agents, options.dimension, options.seed);
    } else if (options.kind == "ijc") {
      s = make_reference_ijc(options.agents, options.dimension, options.seed, options.growth);
    } else if (options.kind == "counterexample") {
      s = make_counterexample(options.seed);
    } else if (options.kind == "random") {
      s = make_random_feasible(options.agents, options.dimension, options.seed);
    } else if (options.kind == "symmetric") {
      s = make_symmetric_feasible(options.agents, options.dimension, options.seed);
    } else if (options.kind == "single-ball") {
      s = make_single_agent_ball(options.t_end);
    } else {
      throw InputError("unknown scenario kind '" + options.kind +
                       "' (ujsc, ijc, counterexample, random, symmetric, single-ball)");
    }
    if (options.output.empty() || options.output == "-") {
      out << to_yaml(s);
    } else {
      save_scenario(s, options.output);
    }
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

}  // namespace optflow
