#include "optflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "projector_detail.hpp"

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double raw_weight(const WeightSpec& spec, std::size_t i, std::size_t j, double t, const StateMatrix& x) {
  const auto r = static_cast<Eigen::Index>(i);
  const auto c = static_cast<Eigen::Index>(j);
  return std::visit(overloaded{
                        [&](const ConstantWeights& w) { return w.values(r, c); },
                        [&](const OscillatingWeights& w) {
                          return w.offset(r, c) + w.amplitude(r, c) * std::sin(w.frequency(r, c) * t + w.phase(r, c));
                        },
                        [&](const DistanceWeights&) { return 1.0 / (1.0 + (x.col(r) - x.col(c)).norm()); },
                    },
                    spec.kind);
}

struct WeightLog {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
};

// Scratch space reused across field evaluations of one run.
struct Workspace {
  Vector agent;
  Vector projected;
  StateMatrix k1, k2, k3, k4, stage, increment;
};

void field_into(const FlowModel& model, const DigraphSnapshot& graph, double t, const StateMatrix& x,
                StateMatrix& dx, Workspace& ws, WeightLog* log) {
  dx.setZero(x.rows(), x.cols());
  for (const Arc& arc : graph.arcs()) {
    double a = std::clamp(raw_weight(model.weights, arc.to, arc.from, t, x), model.weights.lower,
                          model.weights.upper);
    if (log != nullptr) {
      log->lo = std::min(log->lo, a);
      log->hi = std::max(log->hi, a);
      ++log->count;
    }
    const auto i = static_cast<Eigen::Index>(arc.to);
    const auto j = static_cast<Eigen::Index>(arc.from);
    dx.col(i) += a * (x.col(j) - x.col(i));
  }
  ws.agent.resize(x.rows());
  ws.projected.resize(x.rows());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    ws.agent = x.col(i);
    detail::project_to(model.sets[static_cast<std::size_t>(i)], ws.agent, ws.projected);
    dx.col(i) += model.gains.at(static_cast<std::size_t>(i)) * (ws.projected - ws.agent);
  }
}

void check_shapes(const FlowModel& model, const StateMatrix& x) {
  if (model.sets.empty()) throw InputError("model has no agents");
  if (static_cast<std::size_t>(x.cols()) != model.agents()) {
    throw InputError("state has " + std::to_string(x.cols()) + " agents, model has " +
                     std::to_string(model.agents()));
  }
  if (static_cast<std::size_t>(x.rows()) != model.dimension()) {
    throw InputError("state dimension " + std::to_string(x.rows()) + " does not match sets (" +
                     std::to_string(model.dimension()) + ")");
  }
  if (model.topology.node_count() != model.agents()) throw InputError("topology node count differs from agents");
  if (!model.gains.values.empty() && model.gains.values.size() != model.agents()) {
    throw InputError("gain count differs from agent count");
  }
}

}  // namespace

double GainSpec::max_gain() const {
  if (values.empty()) return 1.0;
  return *std::max_element(values.begin(), values.end());
}

std::size_t FlowModel::dimension() const {
  if (sets.empty()) return 0;
  return optflow::dimension(sets.front());
}

std::size_t Trajectory::nearest_sample(double t) const {
  if (times.empty()) throw InputError("empty trajectory");
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) return times.size() - 1;
  const auto idx = static_cast<std::size_t>(std::distance(times.begin(), it));
  if (idx > 0 && t - times[idx - 1] < times[idx] - t) return idx - 1;
  return idx;
}

double evaluate_weight(const WeightSpec& spec, std::size_t i, std::size_t j, double t, const StateMatrix& x) {
  return std::clamp(raw_weight(spec, i, j, t, x), spec.lower, spec.upper);
}

StateMatrix vector_field(const FlowModel& model, double t, const StateMatrix& x) {
  check_shapes(model, x);
  StateMatrix dx;
  Workspace ws;
  field_into(model, model.topology.snapshot_at(t), t, x, dx, ws, nullptr);
  return dx;
}

double lipschitz_bound(std::size_t agents, double weight_upper, double max_gain) {
  const double others = agents > 0 ? static_cast<double>(agents - 1) : 0.0;
  return 2.0 * others * weight_upper + 2.0 * max_gain;
}

double lipschitz_bound(const FlowModel& model) {
  return lipschitz_bound(model.agents(), model.weights.upper, model.gains.max_gain());
}

Trajectory simulate(const FlowModel& model, const StateMatrix& x0, const IntegratorConfig& config) {
  check_shapes(model, x0);
  if (!x0.allFinite()) throw InputError("initial state is not finite");
  const double h = config.step;
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("integration step must be positive");
  if (!(config.t_end > 0.0) || config.t_end > model.topology.horizon()) {
    throw InputError("t_end must lie in (0, topology horizon]");
  }
  const double lip = lipschitz_bound(model);
  if (h * lip > kStepGuard) {
    throw InputError(fmt::format("step-size guard: h * L = {:.4g} * {:.4g} = {:.4g} exceeds {}", h, lip, h * lip,
                                 kStepGuard));
  }

  Trajectory traj;
  const auto estimate = static_cast<std::size_t>(config.t_end / h) + model.topology.pieces().size() + 2;
  traj.times.reserve(estimate);
  traj.states.reserve(estimate);
  traj.pieces.reserve(estimate);

  Workspace ws;
  WeightLog log;
  StateMatrix x = x0;
  StateMatrix carry = StateMatrix::Zero(x0.rows(), x0.cols());
  double t = 0.0;
  std::size_t piece = 0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  traj.pieces.push_back(piece);

  const auto& pieces = model.topology.pieces();
  while (t < config.t_end) {
    const double segment_start = t;
    const double segment_end = std::min(model.topology.piece_end(piece), config.t_end);
    const DigraphSnapshot& graph = pieces[piece].graph;
    for (std::size_t n = 1; t < segment_end; ++n) {
      double target = segment_start + static_cast<double>(n) * h;
      if (target >= segment_end - 1e-9 * h) target = segment_end;
      const double dt = target - t;

      if (config.method == Method::Euler) {
        field_into(model, graph, t, x, ws.k1, ws, &log);
        ws.increment = dt * ws.k1;
      } else {
        field_into(model, graph, t, x, ws.k1, ws, &log);
        ws.stage = x + (0.5 * dt) * ws.k1;
        field_into(model, graph, t + 0.5 * dt, ws.stage, ws.k2, ws, &log);
        ws.stage = x + (0.5 * dt) * ws.k2;
        field_into(model, graph, t + 0.5 * dt, ws.stage, ws.k3, ws, &log);
        ws.stage = x + dt * ws.k3;
        field_into(model, graph, t + dt, ws.stage, ws.k4, ws, &log);
        ws.increment = (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
      }
      // Kahan-compensated update: near a fixed point h * dx drops below half an
      // ulp of x and a plain sum would stall a few hundred ulps short of it.
      ws.increment -= carry;
      ws.stage = x + ws.increment;
      carry = (ws.stage - x) - ws.increment;
      x = ws.stage;
      t = target;

      if (!x.allFinite()) {
        Eigen::Index bad_col = 0;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          if (!x.col(c).allFinite()) {
            bad_col = c;
            break;
          }
        }
        throw InvariantViolation(fmt::format("non-finite state for agent {} at t = {:.9f}", bad_col, t));
      }
      traj.times.push_back(t);
      traj.states.push_back(x);
      traj.pieces.push_back(piece);
    }
    if (t >= model.topology.piece_end(piece) && piece + 1 < pieces.size()) ++piece;
  }

  traj.weight_evaluations = log.count;
  traj.weight_min = log.count > 0 ? log.lo : 0.0;
  traj.weight_max = log.count > 0 ? log.hi : 0.0;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::vector<ConvexSet>& sets,
                          const IntersectionOracle& oracle) {
  const std::size_t m = traj.dimension();
  out << "t,agent";
  for (std::size_t c = 0; c < m; ++c) out << ",c" << c;
  out << ",dist_Xi,dist_X0\n";
  Vector agent(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const StateMatrix& x = traj.states[k];
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      agent = x.col(i);
      out << fmt::format("{:.9f},{}", traj.times[k], i);
      for (Eigen::Index c = 0; c < x.rows(); ++c) out << fmt::format(",{:.17g}", agent(c));
      out << fmt::format(",{:.17g},{:.17g}\n", distance(sets[static_cast<std::size_t>(i)], agent),
                         distance(oracle, agent));
    }
  }
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                           const IntersectionOracle& oracle) {
  std::ostringstream out;
  write_trajectory_csv(out, traj, sets, oracle);
  return out.str();
}

}  // namespace optflow
