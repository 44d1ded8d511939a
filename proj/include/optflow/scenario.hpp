#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "optflow/convex_sets.hpp"
#include "optflow/dynamics.hpp"
#include "optflow/topology.hpp"

namespace optflow {

/// Complete description of one experiment.
struct Scenario {
  std::size_t dimension = 2;
  std::size_t agents = 1;
  std::vector<ConvexSet> sets;
  TopologySpec topology;
  WeightSpec weights;
  GainSpec gains;
  StateMatrix initial;  // dimension x agents
  IntegratorConfig integrator;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;
};

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  /// Largest Dykstra centroid residual over the feasibility probes.
  double feasibility_residual = 0.0;
  /// False when X0 boundedness could not be established structurally.
  bool boundedness_verified = false;

  bool all_pass() const;
  const AssumptionCheck* find(const std::string& name) const;
  /// Failing checks joined into one line.
  std::string failures() const;
};

// Check names used in ValidationReport.
inline constexpr const char* kCheckStructure = "structure";
inline constexpr const char* kCheckDwell = "A1_dwell";
inline constexpr const char* kCheckSets = "A2_sets";
inline constexpr const char* kCheckFeasibility = "A3_feasibility";
inline constexpr const char* kCheckWeights = "A4_weights";
inline constexpr const char* kCheckGains = "gains";
inline constexpr const char* kCheckStep = "step_guard";

ValidationReport validate_scenario(const Scenario& s);

/// X0 = intersection of the scenario's sets, with default oracle settings.
IntersectionOracle common_oracle(const Scenario& s);
/// Throws InputError when the topology cannot be realized.
FlowModel build_model(const Scenario& s);
Trajectory simulate(const Scenario& s);

/// Balls of radius 2 centred on the unit circle, all containing the origin;
/// a directed ring shown one arc at a time (pieces of length 1); agents start
/// on a radius-5 circle.
Scenario make_reference_ujsc(std::size_t agents, std::size_t dimension, std::uint64_t seed);
/// Same sets and start as the UJSC reference. Bidirectional star edges are
/// shown one at a time; interval k lasts base * growth^k with base = dwell * (N - 1).
Scenario make_reference_ijc(std::size_t agents, std::size_t dimension, std::uint64_t seed, double growth);
/// Two agents, identical unit balls, no links, starts at (+-3, 0).
Scenario make_counterexample(std::uint64_t seed);
/// Random halfspaces, balls and boxes all containing a common ball of radius
/// 0.5; random-dwell directed topology; distance-dependent weights.
Scenario make_random_feasible(std::size_t agents, std::size_t dimension, std::uint64_t seed);
/// As make_random_feasible but bidirectional, with symmetric weights and unit gains.
Scenario make_symmetric_feasible(std::size_t agents, std::size_t dimension, std::uint64_t seed);
/// One agent, unit ball at the origin, start (2, 0): x(t) = (1 + e^{-t}, 0).
Scenario make_single_agent_ball(double t_end);

/// Largest step not exceeding `preferred` that passes the step-size guard.
double guarded_step(const Scenario& s, double preferred = 0.01);

// Scenario files (YAML, see docs/scenario_schema.md).
std::string to_yaml(const Scenario& s);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

}  // namespace optflow
