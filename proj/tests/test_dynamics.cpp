#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "optflow/dynamics.hpp"
#include "optflow/errors.hpp"

using namespace optflow;

namespace {

DigraphSnapshot complete(std::size_t n) {
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) arcs.push_back({i, j});
  return DigraphSnapshot(n, arcs);
}

SwitchingTopology fixed(const DigraphSnapshot& g, double horizon) {
  return SwitchingTopology({{0.0, g}}, 0.5, horizon);
}

WeightSpec constant(std::size_t n, double a, double lo = 0.1, double hi = 2.0) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), a);
  w.diagonal().setZero();
  return WeightSpec{ConstantWeights{w}, lo, hi};
}

}  // namespace

TEST_CASE("vector field by hand") {
  // agent 0 in ball(0,1), agent 1 in halfspace x <= 5; arc 1 -> 0 with weight 0.5
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}, Halfspace{Eigen::Vector2d(1, 0), 5.0}},
                        fixed(DigraphSnapshot(2, {{1, 0}}), 10.0),
                        constant(2, 0.5),
                        GainSpec{{2.0, 1.0}, 1.0}};
  StateMatrix x(2, 2);
  x << 3, 7, 4, 1;  // x0 = (3, 4), x1 = (7, 1)
  const StateMatrix dx = vector_field(model, 0.0, x);
  // 0.5 * ((7,1) - (3,4)) + 2 * ((0.6, 0.8) - (3, 4))
  CHECK(dx(0, 0) == doctest::Approx(0.5 * 4 + 2 * (0.6 - 3)));
  CHECK(dx(1, 0) == doctest::Approx(0.5 * -3 + 2 * (0.8 - 4)));
  // agent 1 has no neighbors: only its projection term
  CHECK(dx(0, 1) == doctest::Approx(-2.0));
  CHECK(dx(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("weights are clamped") {
  const WeightSpec spec = constant(2, 5.0, 0.1, 2.0);
  StateMatrix x = StateMatrix::Zero(1, 2);
  CHECK(evaluate_weight(spec, 0, 1, 0.0, x) == 2.0);
  const WeightSpec low = constant(2, 0.01, 0.1, 2.0);
  CHECK(evaluate_weight(low, 1, 0, 0.0, x) == 0.1);

  OscillatingWeights osc{Eigen::MatrixXd::Constant(2, 2, 1.0), Eigen::MatrixXd::Constant(2, 2, 0.5),
                         Eigen::MatrixXd::Constant(2, 2, 2.0), Eigen::MatrixXd::Zero(2, 2)};
  const WeightSpec ws{osc, 0.1, 2.0};
  CHECK(evaluate_weight(ws, 0, 1, 0.3, x) == doctest::Approx(1.0 + 0.5 * std::sin(0.6)));

  StateMatrix far(1, 2);
  far << 0, 3;
  CHECK(evaluate_weight(WeightSpec{DistanceWeights{}, 0.1, 2.0}, 0, 1, 0.0, far) == doctest::Approx(0.25));
  CHECK(evaluate_weight(WeightSpec{DistanceWeights{}, 0.3, 2.0}, 0, 1, 0.0, far) == 0.3);
}

TEST_CASE("lipschitz bound") {
  CHECK(lipschitz_bound(4, 1.0, 1.0) == doctest::Approx(8.0));
  CHECK(lipschitz_bound(1, 3.0, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("single agent reaches its ball at the analytic rate") {
  // outside the unit ball the radius obeys r' = -(r - 1)
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}}, fixed(DigraphSnapshot(1, {}), 5.0),
                        WeightSpec{ConstantWeights{Eigen::MatrixXd::Zero(1, 1)}, 0.1, 1.0}, GainSpec{}};
  StateMatrix x0(2, 1);
  x0 << 2, 0;
  for (Method method : {Method::RK4, Method::Euler}) {
    const Trajectory traj = simulate(model, x0, IntegratorConfig{method, 0.01, 5.0});
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      worst = std::max(worst, std::abs(traj.states[k].norm() - (1.0 + std::exp(-traj.times[k]))));
    }
    CHECK(worst < (method == Method::RK4 ? 1e-9 : 5e-3));
    CHECK(traj.times.back() == 5.0);
  }
}

TEST_CASE("two agents reach consensus at rate 2a") {
  const double a = 0.7;
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 100.0}, Ball{Eigen::Vector2d(0, 0), 100.0}},
                        fixed(complete(2), 4.0), constant(2, a), GainSpec{}};
  StateMatrix x0(2, 2);
  x0 << -1, 3, 2, 0;
  const Trajectory traj = simulate(model, x0, IntegratorConfig{Method::RK4, 0.01, 4.0});
  const double gap0 = (x0.col(0) - x0.col(1)).norm();
  for (std::size_t k = 0; k < traj.size(); k += 37) {
    const double gap = (traj.states[k].col(0) - traj.states[k].col(1)).norm();
    CHECK(gap == doctest::Approx(gap0 * std::exp(-2 * a * traj.times[k])).epsilon(1e-8));
  }
  // the mean is conserved
  const Eigen::Vector2d mean0 = x0.rowwise().mean();
  CHECK((traj.states.back().rowwise().mean() - mean0).norm() < 1e-12);
}

TEST_CASE("switch instants are hit exactly") {
  const auto g = complete(2);
  const SwitchingTopology topo({{0.0, g}, {0.537, DigraphSnapshot(2, {})}, {1.291, g}}, 0.5, 3.0);
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}, Ball{Eigen::Vector2d(1, 0), 1.0}}, topo, constant(2, 1.0),
                        GainSpec{}};
  StateMatrix x0(2, 2);
  x0 << 4, -4, 1, 1;
  const Trajectory traj = simulate(model, x0, IntegratorConfig{Method::RK4, 0.015, 2.0});
  auto has_time = [&](double t) {
    for (double s : traj.times)
      if (s == t) return true;
    return false;
  };
  CHECK(has_time(0.537));
  CHECK(has_time(1.291));
  CHECK(traj.times.back() == 2.0);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    CHECK(traj.times[k] > traj.times[k - 1]);
    CHECK(traj.times[k] - traj.times[k - 1] <= 0.015 + 1e-12);
  }
  // the sample ending at 0.537 came from the first piece, the next from the second
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    if (traj.times[k] == 0.537) {
      CHECK(traj.pieces[k] == 0);
      CHECK(traj.pieces[k + 1] == 1);
    }
  }
  CHECK(traj.nearest_sample(0.54) < traj.size());
  CHECK(traj.times[traj.nearest_sample(0.537)] == 0.537);
}

TEST_CASE("step guard and shape checks") {
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}, Ball{Eigen::Vector2d(0, 0), 1.0}}, fixed(complete(2), 5.0),
                        constant(2, 1.0), GainSpec{}};
  StateMatrix x0 = StateMatrix::Zero(2, 2);
  // L = 2 * 1 * 2 + 2 * 1 = 6
  CHECK_NOTHROW(simulate(model, x0, IntegratorConfig{Method::RK4, 0.016, 0.1}));
  CHECK_THROWS_AS(simulate(model, x0, IntegratorConfig{Method::RK4, 0.02, 0.1}), InputError);
  CHECK_THROWS_AS(simulate(model, StateMatrix::Zero(3, 2), IntegratorConfig{}), InputError);
  CHECK_THROWS_AS(simulate(model, StateMatrix::Zero(2, 3), IntegratorConfig{}), InputError);
  CHECK_THROWS_AS(simulate(model, x0, IntegratorConfig{Method::RK4, 0.01, 6.0}), InputError);
  StateMatrix bad = x0;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(simulate(model, bad, IntegratorConfig{}), InputError);
}

TEST_CASE("overflowing state raises an invariant violation") {
  const FlowModel model{{Ball{Vector::Zero(1), 1.0}, Ball{Vector::Zero(1), 1.0}}, fixed(complete(2), 5.0),
                        constant(2, 1.0), GainSpec{}};
  StateMatrix x0(1, 2);
  x0 << 1.7e308, -1.7e308;
  CHECK_THROWS_AS(simulate(model, x0, IntegratorConfig{Method::RK4, 0.01, 1.0}), InvariantViolation);
}

TEST_CASE("trajectory csv") {
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}}, fixed(DigraphSnapshot(1, {}), 1.0),
                        WeightSpec{ConstantWeights{Eigen::MatrixXd::Zero(1, 1)}, 0.1, 1.0}, GainSpec{}};
  StateMatrix x0(2, 1);
  x0 << 2, 0;
  const Trajectory traj = simulate(model, x0, IntegratorConfig{Method::RK4, 0.05, 1.0});
  const IntersectionOracle oracle{model.sets};
  const std::string csv = trajectory_csv(traj, model.sets, oracle);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,agent,c0,c1,dist_Xi,dist_X0");
  std::getline(in, line);
  CHECK(line == "0.000000000,0,2,0,1,1");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == traj.size());
  // a rerun is byte-identical
  CHECK(trajectory_csv(simulate(model, x0, IntegratorConfig{Method::RK4, 0.05, 1.0}), model.sets, oracle) == csv);
}

TEST_CASE("weight extremes are recorded") {
  const FlowModel model{{Ball{Eigen::Vector2d(0, 0), 1.0}, Ball{Eigen::Vector2d(0, 0), 1.0}}, fixed(complete(2), 2.0),
                        WeightSpec{DistanceWeights{}, 0.2, 1.0}, GainSpec{}};
  StateMatrix x0(2, 2);
  x0 << 10, -10, 0, 0;
  const Trajectory traj = simulate(model, x0, IntegratorConfig{Method::RK4, 0.01, 2.0});
  CHECK(traj.weight_evaluations > 0);
  CHECK(traj.weight_min == doctest::Approx(0.2));
  CHECK(traj.weight_max <= 1.0);
  CHECK(traj.weight_max > traj.weight_min);
}
