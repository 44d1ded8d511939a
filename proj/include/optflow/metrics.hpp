#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "optflow/convex_sets.hpp"
#include "optflow/dynamics.hpp"

namespace optflow {

/// max_i |x_i|^2_{X0}
double d_of(const StateMatrix& x, const IntersectionOracle& oracle);

/// Per-coordinate max - min over agents, plus the largest pairwise distance.
struct Spread {
  Vector per_coordinate;
  double diameter = 0.0;
};
Spread spread_of(const StateMatrix& x);

/// Distances of every agent to its own set and to X0; rows are samples.
struct DistanceTable {
  Eigen::MatrixXd to_own;
  Eigen::MatrixXd to_common;

  /// d(t_k) = max_i to_common(k, i)^2
  double d(std::size_t k) const;
};
DistanceTable tabulate_distances(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                                 const IntersectionOracle& oracle);

/// Slack for forward differences of d: 1e-6 + 10 L^2 d(0) h^2.
double monotone_tolerance(double lipschitz, double step, double d0);

struct MonotonicityViolation {
  double t = 0.0;
  double increase = 0.0;
};
std::vector<MonotonicityViolation> check_monotone_d(const Trajectory& traj, const IntersectionOracle& oracle,
                                                    double tol_mono);
std::vector<MonotonicityViolation> check_monotone_d(const std::vector<double>& times, const std::vector<double>& d,
                                                    double tol_mono);

/// Trapezoid integral of sum_i |x_i|^2_{X_i} over the trajectory.
double barbalat_integral(const Trajectory& traj, const std::vector<ConvexSet>& sets);
double barbalat_integral(const std::vector<double>& times, const DistanceTable& table);

/// True when the integral bound N d(0) / 2 is known to hold: bidirectional
/// pieces, symmetric weights and every gain at least 1.
bool integral_bound_applies(const FlowModel& model);

struct BarbalatReport {
  double integral = 0.0;
  double bound = 0.0;  // N d(0) / 2
  bool guaranteed = false;
  std::string note;
};

struct ContainmentRecord {
  double t = 0.0;
  double t_hat = 0.0;
  /// max_i hull_distance(states(t), x_i(t_hat))
  double hull_gap = 0.0;
  /// 2 max_j |x_j(t)|_{X0}
  double allowance = 0.0;
  double excess = 0.0;
  bool flagged = false;
};

inline constexpr double kContainmentTolerance = 1e-4;

/// Every pair t <= t_hat from check_times (snapped to the nearest samples).
std::vector<ContainmentRecord> check_delta_containment(const Trajectory& traj, const IntersectionOracle& oracle,
                                                       const std::vector<double>& check_times,
                                                       double tolerance = kContainmentTolerance);

/// Earliest sample time from which max_i |x_i|_{X0} <= tol and diameter <= tol
/// hold through the final sample.
std::optional<double> detect_convergence(const Trajectory& traj, const IntersectionOracle& oracle, double tol);

struct TailStatistics {
  double window_start = 0.0;
  std::vector<double> max_dist_own;  // max |x_i|_{X_i} over the window
  std::vector<double> d_range;       // max - min of |x_i|^2_{X0} over the window

  double max_own() const;
};
TailStatistics tail_statistics(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                               const IntersectionOracle& oracle, double tail_fraction);

struct MetricsOptions {
  double convergence_tol = 1e-3;
  double containment_every = 5.0;
  double tail_fraction = 0.1;
  double step = 0.01;
};

struct MetricsSample {
  double t = 0.0;
  double d = 0.0;
  Vector spread;
  double h_max = 0.0;
  double diameter = 0.0;
  std::vector<double> dist_own;
  std::vector<double> dist_common;
};

struct MetricsReport {
  std::vector<MetricsSample> samples;
  double tol_mono = 0.0;
  double d0 = 0.0;
  double max_d = 0.0;
  std::vector<MonotonicityViolation> monotonicity_violations;
  BarbalatReport barbalat;
  std::vector<ContainmentRecord> delta_containment;
  std::optional<double> converged_at;
  TailStatistics tail;

  bool sublevel_holds() const { return max_d <= d0 + tol_mono; }
  std::size_t containment_flags() const;
};

MetricsReport compute_metrics(const Trajectory& traj, const FlowModel& model, const IntersectionOracle& oracle,
                              const MetricsOptions& options);

nlohmann::json to_json(const MetricsReport& report);
/// `t,d,H_max,diam,max_dist_Xi` per sample.
std::string summary_csv(const MetricsReport& report);

}  // namespace optflow
