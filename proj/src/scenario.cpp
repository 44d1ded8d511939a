#include "optflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "sampling_detail.hpp"

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::size_t kFeasibilityProbes = 5;
constexpr double kProbeRadius = 10.0;
constexpr std::size_t kGenerationAttempts = 20;

bool forces_bounded(const ConvexSet& set) {
  return std::visit(overloaded{
                        [](const Ball&) { return true; },
                        [](const Box&) { return true; },
                        [](const Affine& a) { return a.basis.cols() == 0; },
                        [](const Intersection& in) {
                          return std::any_of(in.members.begin(), in.members.end(), forces_bounded);
                        },
                        [](const auto&) { return false; },
                    },
                    set.shape);
}

AssumptionCheck check(const char* name, bool pass, std::string detail) {
  return AssumptionCheck{name, pass, std::move(detail)};
}

// Problems with shapes and counts; empty when the scenario is well formed.
std::string structure_problem(const Scenario& s) {
  if (s.agents == 0) return "problem.N must be at least 1";
  if (s.dimension == 0) return "problem.m must be at least 1";
  if (s.sets.size() != s.agents) {
    return fmt::format("problem.sets has {} entries, N = {}", s.sets.size(), s.agents);
  }
  for (std::size_t i = 0; i < s.sets.size(); ++i) {
    std::size_t dim = 0;
    try {
      dim = dimension(s.sets[i]);
    } catch (const InputError& e) {
      return fmt::format("problem.sets[{}]: {}", i, e.what());
    }
    if (dim != s.dimension) return fmt::format("problem.sets[{}] has dimension {}, m = {}", i, dim, s.dimension);
  }
  if (static_cast<std::size_t>(s.initial.rows()) != s.dimension ||
      static_cast<std::size_t>(s.initial.cols()) != s.agents) {
    return fmt::format("initial.states is {}x{}, expected N = {} rows of m = {}", s.initial.cols(),
                       s.initial.rows(), s.agents, s.dimension);
  }
  if (!s.initial.allFinite()) return "initial.states contains non-finite values";
  if (!s.gains.values.empty() && s.gains.values.size() != s.agents) {
    return fmt::format("gains.values has {} entries, N = {}", s.gains.values.size(), s.agents);
  }
  const auto n = static_cast<Eigen::Index>(s.agents);
  auto square = [n](const Eigen::MatrixXd& w) { return w.rows() == n && w.cols() == n; };
  const bool weights_ok = std::visit(overloaded{
                                         [&](const ConstantWeights& w) { return square(w.values); },
                                         [&](const OscillatingWeights& w) {
                                           return square(w.offset) && square(w.amplitude) &&
                                                  square(w.frequency) && square(w.phase);
                                         },
                                         [](const DistanceWeights&) { return true; },
                                     },
                                     s.weights.kind);
  if (!weights_ok) return fmt::format("weight matrices must be {}x{}", s.agents, s.agents);
  return {};
}

AssumptionCheck check_feasibility(const Scenario& s, ValidationReport& report) {
  const IntersectionOracle oracle = common_oracle(s);
  std::mt19937_64 rng(s.seed ^ 0xA3A3A3A3A3A3A3A3ULL);
  double worst_residual = 0.0;
  double worst_membership = 0.0;
  bool converged = true;
  for (std::size_t probe = 0; probe < kFeasibilityProbes; ++probe) {
    Vector start(static_cast<Eigen::Index>(s.dimension));
    for (Eigen::Index c = 0; c < start.size(); ++c) start(c) = uniform(rng, -kProbeRadius, kProbeRadius);
    try {
      const DykstraResult r = dykstra_solve(oracle, start);
      converged = converged && r.converged;
      worst_residual = std::max(worst_residual, r.residual);
      for (const ConvexSet& member : oracle.members) {
        worst_membership = std::max(worst_membership, distance(member, r.point));
      }
    } catch (const OracleFailure& e) {
      // a nested intersection member failed on its own
      report.feasibility_residual = e.residual();
      return check(kCheckFeasibility, false, std::string("oracle failure: ") + e.what());
    }
  }
  report.feasibility_residual = worst_residual;
  report.boundedness_verified = std::any_of(s.sets.begin(), s.sets.end(), forces_bounded);
  const bool pass = worst_residual < kFeasibilityResidual && worst_membership <= kFeasibilityResidual;
  std::string detail = fmt::format("Dykstra residual {:.3g}, worst member distance {:.3g} over {} probes{}",
                                   worst_residual, worst_membership, kFeasibilityProbes,
                                   converged ? "" : " (iteration budget exhausted)");
  if (!pass) detail += "; the sets do not appear to have a common point";
  detail += report.boundedness_verified ? "; X0 bounded (ball/box member)"
                                        : "; boundedness unverified, user-asserted";
  return check(kCheckFeasibility, pass, std::move(detail));
}

AssumptionCheck check_weights(const Scenario& s) {
  const double lo = s.weights.lower;
  const double hi = s.weights.upper;
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    return check(kCheckWeights, false, fmt::format("need 0 < lower <= upper, got [{}, {}]", lo, hi));
  }
  const auto n = static_cast<Eigen::Index>(s.agents);
  std::string problem;
  auto scan = [&](auto&& entry_range) {
    for (Eigen::Index i = 0; i < n && problem.empty(); ++i) {
      for (Eigen::Index j = 0; j < n && problem.empty(); ++j) {
        if (i == j) continue;
        const auto [a, b] = entry_range(i, j);
        if (!(a >= lo && b <= hi)) {
          problem = fmt::format("a({},{}) ranges over [{:.6g}, {:.6g}], outside [{}, {}]", i, j, a, b, lo, hi);
        }
      }
    }
  };
  std::visit(overloaded{
                 [&](const ConstantWeights& w) {
                   scan([&](Eigen::Index i, Eigen::Index j) { return std::pair{w.values(i, j), w.values(i, j)}; });
                 },
                 [&](const OscillatingWeights& w) {
                   scan([&](Eigen::Index i, Eigen::Index j) {
                     const double amp = std::abs(w.amplitude(i, j));
                     return std::pair{w.offset(i, j) - amp, w.offset(i, j) + amp};
                   });
                 },
                 [](const DistanceWeights&) {},
             },
             s.weights.kind);
  if (!problem.empty()) return check(kCheckWeights, false, problem);
  return check(kCheckWeights, true, fmt::format("weights within [{}, {}]", lo, hi));
}

AssumptionCheck check_gains(const Scenario& s) {
  if (!(s.gains.lower > 0.0)) return check(kCheckGains, false, "gains.lower must be positive");
  for (std::size_t i = 0; i < s.gains.values.size(); ++i) {
    const double b = s.gains.values[i];
    if (!std::isfinite(b) || b < s.gains.lower) {
      return check(kCheckGains, false, fmt::format("gain {} = {} below lower bound {}", i, b, s.gains.lower));
    }
  }
  return check(kCheckGains, true, fmt::format("max gain {}", s.gains.max_gain()));
}

AssumptionCheck check_step(const Scenario& s) {
  const double h = s.integrator.step;
  if (!(h > 0.0) || !std::isfinite(h)) return check(kCheckStep, false, "integrator.step must be positive");
  if (!(s.integrator.t_end > 0.0) || s.integrator.t_end > s.topology.horizon) {
    return check(kCheckStep, false,
                 fmt::format("t_end = {} must lie in (0, horizon = {}]", s.integrator.t_end, s.topology.horizon));
  }
  const double lip = lipschitz_bound(s.agents, s.weights.upper, s.gains.max_gain());
  const bool pass = h * lip <= kStepGuard;
  return check(kCheckStep, pass, fmt::format("h * L = {} * {} = {:.4g} (limit {})", h, lip, h * lip, kStepGuard));
}

Vector circle_point(std::size_t dimension, double angle, double radius) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dimension));
  v(0) = radius * std::cos(angle);
  if (dimension > 1) v(1) = radius * std::sin(angle);
  return v;
}

// Balls of radius 2 on the unit circle; agents on a radius-5 circle rotated
// by a seed-dependent offset.
void reference_sets_and_start(Scenario& s, std::uint64_t seed) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(seed);
  const double offset = two_pi * uniform01(rng);
  s.sets.clear();
  s.initial.resize(static_cast<Eigen::Index>(s.dimension), static_cast<Eigen::Index>(s.agents));
  for (std::size_t i = 0; i < s.agents; ++i) {
    const double angle = two_pi * static_cast<double>(i) / static_cast<double>(s.agents);
    s.sets.emplace_back(Ball{circle_point(s.dimension, angle, 1.0), 2.0});
    s.initial.col(static_cast<Eigen::Index>(i)) = circle_point(s.dimension, angle + offset, 5.0);
  }
}

Eigen::MatrixXd unit_weights(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(k, k);
  w.diagonal().setZero();
  return w;
}

Scenario draw_random(std::size_t agents, std::size_t dimension, std::uint64_t seed, bool symmetric) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.agents = agents;
  s.dimension = dimension;
  s.seed = seed;

  Vector anchor(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index c = 0; c < anchor.size(); ++c) anchor(c) = uniform(rng, -2.0, 2.0);
  for (std::size_t i = 0; i < agents; ++i) {
    // Agent 0 always gets a bounded set so X0 is bounded.
    const std::size_t kind = i == 0 ? 1 + uniform_index(2, rng) : uniform_index(3, rng);
    s.sets.push_back(detail::random_set_around(anchor, static_cast<detail::SimpleKind>(kind), rng));
  }

  RandomDwellTopology topo;
  topo.seed = rng();
  topo.arc_probability = 0.35;
  topo.palette_size = 4;
  topo.min_length = 0.5;
  topo.max_length = 2.0;
  topo.symmetric = symmetric;
  s.topology = TopologySpec{topo, 0.5, 50.0};

  s.weights = WeightSpec{DistanceWeights{}, 0.1, 0.4};
  if (symmetric) {
    s.gains = GainSpec{};
  } else {
    s.gains.lower = 0.5;
    for (std::size_t i = 0; i < agents; ++i) s.gains.values.push_back(uniform(rng, 0.5, 1.0));
  }

  s.initial.resize(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(agents));
  for (Eigen::Index i = 0; i < s.initial.cols(); ++i) {
    for (Eigen::Index c = 0; c < s.initial.rows(); ++c) s.initial(c, i) = uniform(rng, -6.0, 6.0);
  }
  s.integrator = IntegratorConfig{Method::RK4, 0.01, 50.0};
  s.metadata["kind"] = symmetric ? "symmetric" : "random";
  s.metadata["anchor"] = [&] {
    std::string text;
    for (Eigen::Index c = 0; c < anchor.size(); ++c) text += fmt::format("{}{:.17g}", c ? " " : "", anchor(c));
    return text;
  }();
  return s;
}

Scenario generate_validated(std::size_t agents, std::size_t dimension, std::uint64_t seed, bool symmetric) {
  if (agents < 1 || agents > 10 || dimension < 1 || dimension > 4) {
    throw InputError("random scenarios need 1 <= N <= 10 and 1 <= m <= 4");
  }
  std::string last;
  for (std::size_t attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    const std::uint64_t sub = seed + attempt * 0x9E3779B97F4A7C15ULL;
    Scenario s = draw_random(agents, dimension, sub, symmetric);
    s.seed = seed;
    s.metadata["attempt"] = std::to_string(attempt);
    const ValidationReport report = validate_scenario(s);
    if (report.all_pass()) return s;
    last = report.failures();
  }
  throw InputError("scenario generation retries exhausted: " + last);
}

}  // namespace

bool ValidationReport::all_pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::failures() const {
  std::string out;
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!out.empty()) out += "; ";
    out += c.name + ": " + c.detail;
  }
  return out;
}

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  if (std::string problem = structure_problem(s); !problem.empty()) {
    report.checks.push_back(check(kCheckStructure, false, std::move(problem)));
    return report;
  }
  report.checks.push_back(check(kCheckStructure, true, "shapes consistent"));

  if (!(s.topology.dwell > 0.0)) {
    report.checks.push_back(check(kCheckDwell, false, "dwell time must be positive"));
  } else {
    try {
      const SwitchingTopology topo = realize(s.topology, s.agents);
      report.checks.push_back(check(kCheckDwell, true,
                                    fmt::format("{} pieces, dwell {}", topo.pieces().size(), topo.dwell())));
    } catch (const InputError& e) {
      report.checks.push_back(check(kCheckDwell, false, e.what()));
    }
  }

  std::string set_problem;
  for (std::size_t i = 0; i < s.sets.size() && set_problem.empty(); ++i) {
    try {
      validate_set(s.sets[i]);
    } catch (const InputError& e) {
      set_problem = fmt::format("set {}: {}", i, e.what());
    }
  }
  const bool sets_ok = set_problem.empty();
  report.checks.push_back(check(kCheckSets, sets_ok, sets_ok ? "all sets valid" : set_problem));

  if (sets_ok) {
    report.checks.push_back(check_feasibility(s, report));
  } else {
    report.checks.push_back(check(kCheckFeasibility, false, "skipped: invalid sets"));
  }
  report.checks.push_back(check_weights(s));
  report.checks.push_back(check_gains(s));
  report.checks.push_back(check_step(s));
  return report;
}

IntersectionOracle common_oracle(const Scenario& s) {
  IntersectionOracle oracle;
  oracle.members = s.sets;
  return oracle;
}

FlowModel build_model(const Scenario& s) {
  return FlowModel{s.sets, realize(s.topology, s.agents), s.weights, s.gains};
}

Trajectory simulate(const Scenario& s) { return simulate(build_model(s), s.initial, s.integrator); }

double guarded_step(const Scenario& s, double preferred) {
  const double lip = lipschitz_bound(s.agents, s.weights.upper, s.gains.max_gain());
  double h = std::min(preferred, kStepGuard / lip);
  while (h * lip > kStepGuard) h = std::nextafter(h, 0.0);
  return h;
}

Scenario make_reference_ujsc(std::size_t agents, std::size_t dimension, std::uint64_t seed) {
  if (agents < 2 || dimension < 1) throw InputError("UJSC reference needs N >= 2 and m >= 1");
  Scenario s;
  s.agents = agents;
  s.dimension = dimension;
  s.seed = seed;
  reference_sets_and_start(s, seed);

  PeriodicCycleTopology ring;
  ring.piece_length = 1.0;
  for (std::size_t k = 0; k < agents; ++k) ring.graphs.emplace_back(agents, std::vector<Arc>{{k, (k + 1) % agents}});
  s.topology = TopologySpec{ring, 0.5, 200.0};
  s.weights = WeightSpec{ConstantWeights{unit_weights(agents)}, 0.1, 1.0};
  s.gains = GainSpec{};
  s.integrator = IntegratorConfig{Method::RK4, 0.01, 200.0};
  s.integrator.step = guarded_step(s);
  s.metadata["kind"] = "ujsc";
  s.metadata["window"] = fmt::format("{:.17g}", static_cast<double>(agents) * ring.piece_length);
  return s;
}

Scenario make_reference_ijc(std::size_t agents, std::size_t dimension, std::uint64_t seed, double growth) {
  if (agents < 2 || dimension < 1) throw InputError("IJC reference needs N >= 2 and m >= 1");
  if (!(growth > 1.0) || !std::isfinite(growth)) throw InputError("IJC reference needs growth > 1");
  Scenario s;
  s.agents = agents;
  s.dimension = dimension;
  s.seed = seed;
  reference_sets_and_start(s, seed);

  constexpr double dwell = 0.5;
  constexpr std::size_t intervals = 10;
  GrowingIntervalsTopology grow;
  grow.base = dwell * static_cast<double>(agents - 1);
  grow.growth = growth;
  grow.intervals = intervals;
  for (std::size_t k = 1; k < agents; ++k) grow.graphs.emplace_back(agents, std::vector<Arc>{{0, k}, {k, 0}});
  double horizon = 0.0;
  for (std::size_t k = 0; k < intervals; ++k) horizon += grow.base * std::pow(growth, static_cast<double>(k));
  s.topology = TopologySpec{grow, dwell, horizon};
  s.weights = WeightSpec{ConstantWeights{unit_weights(agents)}, 0.1, 1.0};
  s.gains = GainSpec{};
  s.integrator = IntegratorConfig{Method::RK4, 0.01, horizon};
  s.integrator.step = guarded_step(s);
  s.metadata["kind"] = "ijc";
  s.metadata["base_interval"] = fmt::format("{:.17g}", grow.base);
  return s;
}

Scenario make_counterexample(std::uint64_t seed) {
  Scenario s;
  s.agents = 2;
  s.dimension = 2;
  s.seed = seed;
  s.sets = {Ball{Vector::Zero(2), 1.0}, Ball{Vector::Zero(2), 1.0}};
  s.topology = TopologySpec{StaticTopology{DigraphSnapshot(2, {})}, 0.5, 100.0};
  s.weights = WeightSpec{ConstantWeights{unit_weights(2)}, 0.1, 1.0};
  s.gains = GainSpec{};
  s.initial.resize(2, 2);
  s.initial << 3.0, -3.0, 0.0, 0.0;
  s.integrator = IntegratorConfig{Method::RK4, 0.01, 100.0};
  s.metadata["kind"] = "counterexample";
  s.metadata["connectivity"] = "deficient";
  return s;
}

Scenario make_random_feasible(std::size_t agents, std::size_t dimension, std::uint64_t seed) {
  return generate_validated(agents, dimension, seed, false);
}

Scenario make_symmetric_feasible(std::size_t agents, std::size_t dimension, std::uint64_t seed) {
  return generate_validated(agents, dimension, seed, true);
}

Scenario make_single_agent_ball(double t_end) {
  if (!(t_end > 0.0)) throw InputError("t_end must be positive");
  Scenario s;
  s.agents = 1;
  s.dimension = 2;
  s.sets = {Ball{Vector::Zero(2), 1.0}};
  s.topology = TopologySpec{StaticTopology{DigraphSnapshot(1, {})}, 0.5, t_end};
  s.weights = WeightSpec{ConstantWeights{Eigen::MatrixXd::Zero(1, 1)}, 0.1, 1.0};
  s.gains = GainSpec{};
  s.initial.resize(2, 1);
  s.initial << 2.0, 0.0;
  s.integrator = IntegratorConfig{Method::RK4, 0.01, t_end};
  s.metadata["kind"] = "single-ball";
  return s;
}

}  // namespace optflow
