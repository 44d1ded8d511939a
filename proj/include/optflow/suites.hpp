#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace optflow {

/// Bumped whenever the scorecard layout changes.
inline constexpr int kScorecardSchemaVersion = 1;

struct SuiteCheck {
  std::string name;
  bool pass = false;
  /// Measured quantity (worst violation, count, error, ...).
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<SuiteCheck> checks;
  /// Per-scenario extras (hashes, convergence times, ...).
  nlohmann::json details = nlohmann::json::object();

  bool pass() const;
};

struct SuiteOptions {
  /// Worker threads for multi-scenario suites; 0 picks the hardware count.
  std::size_t threads = 0;
};

const std::vector<std::string>& suite_names();
/// Throws InputError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& options = {});

nlohmann::json scorecard(const SuiteResult& result);

}  // namespace optflow
