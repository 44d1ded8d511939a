#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "optflow/convex_sets.hpp"
#include "optflow/topology.hpp"

namespace optflow {

/// Network state as an m x N matrix; column i is agent i.
using StateMatrix = Eigen::MatrixXd;

/// a_ij = values(i, j) for the arc j -> i.
struct ConstantWeights {
  Eigen::MatrixXd values;
};

/// a_ij(t) = offset + amplitude * sin(frequency * t + phase), entrywise.
struct OscillatingWeights {
  Eigen::MatrixXd offset;
  Eigen::MatrixXd amplitude;
  Eigen::MatrixXd frequency;
  Eigen::MatrixXd phase;
};

/// a_ij(x) = 1 / (1 + |x_i - x_j|).
struct DistanceWeights {};

using WeightKind = std::variant<ConstantWeights, OscillatingWeights, DistanceWeights>;

/// Arc weights; every evaluation is clamped to [lower, upper].
struct WeightSpec {
  WeightKind kind = DistanceWeights{};
  double lower = 0.1;
  double upper = 2.0;
};

/// Per-agent projection gains b_i (all 1 when `values` is empty).
struct GainSpec {
  std::vector<double> values;
  double lower = 1.0;

  double at(std::size_t i) const { return values.empty() ? 1.0 : values[i]; }
  double max_gain() const;
};

enum class Method { Euler, RK4 };

struct IntegratorConfig {
  Method method = Method::RK4;
  double step = 0.01;
  double t_end = 1.0;
};

/// Largest h * lipschitz_bound accepted by simulate.
inline constexpr double kStepGuard = 0.1;

/// Everything the closed-loop field needs.
struct FlowModel {
  std::vector<ConvexSet> sets;
  SwitchingTopology topology;
  WeightSpec weights;
  GainSpec gains;

  std::size_t agents() const { return sets.size(); }
  std::size_t dimension() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateMatrix> states;
  /// Topology piece in force during the step that produced each sample.
  std::vector<std::size_t> pieces;
  /// Extremes of every weight evaluated during the run.
  double weight_min = 0.0;
  double weight_max = 0.0;
  std::size_t weight_evaluations = 0;

  std::size_t size() const { return times.size(); }
  std::size_t agents() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().cols()); }
  std::size_t dimension() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().rows()); }
  /// Index of the sample nearest to t.
  std::size_t nearest_sample(double t) const;
};

double evaluate_weight(const WeightSpec& spec, std::size_t i, std::size_t j, double t, const StateMatrix& x);

/// dx_i = sum_j a_ij (x_j - x_i) + b_i (P_i(x_i) - x_i) with the graph in force at t.
StateMatrix vector_field(const FlowModel& model, double t, const StateMatrix& x);

/// 2 (N - 1) a* + 2 max b_i.
double lipschitz_bound(std::size_t agents, double weight_upper, double max_gain);
double lipschitz_bound(const FlowModel& model);

/// Fixed-step integration from x0 at t = 0 to config.t_end, landing exactly on
/// every switch instant. Throws InputError when the step guard or shapes fail
/// and InvariantViolation on a non-finite state.
Trajectory simulate(const FlowModel& model, const StateMatrix& x0, const IntegratorConfig& config);

/// `t,agent,c0..c{m-1},dist_Xi,dist_X0`, one row per (sample, agent).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::vector<ConvexSet>& sets,
                          const IntersectionOracle& oracle);
std::string trajectory_csv(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                           const IntersectionOracle& oracle);

}  // namespace optflow
