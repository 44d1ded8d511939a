#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optflow/commands.hpp"

int main(int argc, char** argv) {
  using namespace optflow;
  CLI::App app{"Projected consensus flow over switching graphs"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunOptions run;
  std::string run_out;
  std::optional<double> run_window;
  auto* run_cmd = app.add_subcommand("run", "validate, certify, simulate and write metrics");
  run_cmd->add_option("scenario", run.scenario, "scenario file")->required();
  run_cmd->add_option("-o,--out", run_out, "output directory (default $OPTFLOW_OUTPUT_DIR or ./optflow-out)");
  run_cmd->add_flag("--allow-disconnected", run.allow_disconnected,
                    "simulate even when neither UJSC nor IJC holds");
  run_cmd->add_option("--window", run_window, "UJSC window length (default N x longest piece)");
  run_cmd->add_option("--tol", run.convergence_tol, "convergence tolerance")->capture_default_str();

  CertifyOptions certify;
  std::optional<double> certify_window;
  auto* certify_cmd = app.add_subcommand("certify", "check UJSC / IJC on the scenario's switching signal");
  certify_cmd->add_option("scenario", certify.scenario, "scenario file")->required();
  certify_cmd->add_option("--window", certify_window, "UJSC window length (default N x longest piece)");
  const std::map<std::string, Condition> conditions = {
      {"ujsc", Condition::Ujsc}, {"ijc", Condition::Ijc}, {"any", Condition::Any}, {"all", Condition::All}};
  certify_cmd->add_option("--condition", certify.condition, "ujsc, ijc, any or all")
      ->transform(CLI::CheckedTransformer(conditions, CLI::ignore_case))
      ->capture_default_str();

  SuiteCommandOptions suite;
  std::string suite_out;
  auto* suite_cmd = app.add_subcommand("suite", "run an acceptance suite and write a JSON scorecard");
  suite_cmd->add_option("name", suite.suite, "suite name")->required();
  suite_cmd->add_option("-o,--out", suite_out, "output directory");
  suite_cmd->add_option("-j,--threads", suite.threads, "worker threads (0 = hardware)");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated scenario file");
  gen_cmd->add_option("kind", gen.kind, "ujsc | ijc | counterexample | random | symmetric | single-ball")->required();
  gen_cmd->add_option("-N,--agents", gen.agents, "agent count")->capture_default_str();
  gen_cmd->add_option("-m,--dim", gen.dimension, "state dimension")->capture_default_str();
  gen_cmd->add_option("-s,--seed", gen.seed, "seed")->capture_default_str();
  gen_cmd->add_option("--growth", gen.growth, "interval growth factor (ijc)")->capture_default_str();
  gen_cmd->add_option("--t-end", gen.t_end, "horizon (single-ball)")->capture_default_str();
  gen_cmd->add_option("-o,--out", gen.output, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  if (*run_cmd) {
    if (!run_out.empty()) run.output_dir = run_out;
    run.window = run_window;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*certify_cmd) {
    certify.window = certify_window;
    return cmd_certify(certify, std::cout, std::cerr);
  }
  if (*suite_cmd) {
    if (!suite_out.empty()) suite.output_dir = suite_out;
    return cmd_suite(suite, std::cout, std::cerr);
  }
  return cmd_gen(gen, std::cout, std::cerr);
}
