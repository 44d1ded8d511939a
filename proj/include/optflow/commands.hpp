#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "optflow/topology.hpp"

namespace optflow {

inline constexpr const char* kToolVersion = "0.1.0";
/// Default output directory when --out is not given.
inline constexpr const char* kOutputDirEnv = "OPTFLOW_OUTPUT_DIR";

/// Process exit codes; a stable contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInvalidInput = 2,
  kExitOracleFailure = 3,
  kExitInvariantViolation = 4,
};

/// --out if given, else $OPTFLOW_OUTPUT_DIR, else ./optflow-out.
std::filesystem::path resolve_output_dir(const std::optional<std::filesystem::path>& requested);

nlohmann::json to_json(const CertificationReport& report);

/// Window used when none is given: N times the longest piece.
double default_window(const SwitchingTopology& topo);

struct RunOptions {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> output_dir;
  bool allow_disconnected = false;
  std::optional<double> window;
  double convergence_tol = 1e-3;
};

/// Writes trajectory.csv, metrics.json, summary.csv, certification.json and
/// manifest.json into the output directory.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

enum class Condition { Ujsc, Ijc, Any, All };

struct CertifyOptions {
  std::filesystem::path scenario;
  std::optional<double> window;
  Condition condition = Condition::Any;
};

/// Prints the JSON report on `out`.
int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err);

struct SuiteCommandOptions {
  std::string suite;
  std::optional<std::filesystem::path> output_dir;
  std::size_t threads = 0;
};

/// Writes <suite>.scorecard.json and manifest.json.
int cmd_suite(const SuiteCommandOptions& options, std::ostream& out, std::ostream& err);

struct GenOptions {
  std::string kind;  // ujsc | ijc | counterexample | random | symmetric | single-ball
  std::size_t agents = 4;
  std::size_t dimension = 2;
  std::uint64_t seed = 0;
  double growth = 2.0;
  double t_end = 1.0;  // single-ball only
  std::filesystem::path output;  // "-" writes to `out`
};

int cmd_gen(const GenOptions& options, std::ostream& out, std::ostream& err);

}  // namespace optflow
