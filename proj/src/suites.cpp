#include "optflow/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "optflow/metrics.hpp"
#include "optflow/scenario.hpp"
#include "sampling_detail.hpp"

namespace optflow {

namespace {

constexpr double kAxiomSlack = 1e-9;
constexpr double kGradientRelError = 1e-5;
constexpr std::size_t kAxiomSamples = 1000;
constexpr std::size_t kOracleSamples = 200;
constexpr std::size_t kLemma41Scenarios = 50;
constexpr std::size_t kEq39Scenarios = 10;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(k) for k in [0, count) on a small pool; the first exception is
// rethrown after every worker has finished.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        body(k);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

SuiteCheck make_check(std::string name, bool pass, double value, double limit, std::string detail) {
  return SuiteCheck{std::move(name), pass, value, limit, std::move(detail)};
}

// Worst excess over a limit plus the number of samples above it.
struct Tally {
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  std::size_t samples = 0;

  void add(double value, double limit) {
    worst = std::max(worst, value);
    ++samples;
    if (value > limit) ++violations;
  }
  SuiteCheck as_check(std::string name, double limit) const {
    return make_check(std::move(name), violations == 0, worst, limit,
                      fmt::format("{} violations over {} samples", violations, samples));
  }
};

Vector random_point(Eigen::Index m, double half_width, std::mt19937_64& rng) {
  Vector v(m);
  for (Eigen::Index c = 0; c < m; ++c) v(c) = uniform(rng, -half_width, half_width);
  return v;
}

// ---- projector axioms ------------------------------------------------------

struct SampledSet {
  ConvexSet set;
  // Draws a point guaranteed to lie in the set.
  std::function<Vector(std::mt19937_64&)> inside;
};

Halfspace random_face(const Vector& p, std::mt19937_64& rng) {
  const Vector normal = uniform(rng, 0.5, 2.0) * detail::random_direction(p.size(), rng);
  return Halfspace{normal, normal.dot(p) + (0.5 + uniform(rng, 0.0, 1.5)) * normal.norm()};
}

std::function<Vector(std::mt19937_64&)> around(const Vector& p) {
  return [p](std::mt19937_64& rng) -> Vector {
    return p + 0.5 * uniform01(rng) * detail::random_direction(p.size(), rng);
  };
}

using VariantMaker = std::function<SampledSet(std::mt19937_64&)>;

std::vector<std::pair<std::string, VariantMaker>> axiom_variants() {
  auto dim = [](std::mt19937_64& rng) { return static_cast<Eigen::Index>(2 + uniform_index(3, rng)); };
  auto anchor = [](Eigen::Index m, std::mt19937_64& rng) { return random_point(m, 2.0, rng); };
  std::vector<std::pair<std::string, VariantMaker>> out;
  out.emplace_back("halfspace", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    return SampledSet{random_face(p, rng), around(p)};
  });
  out.emplace_back("ball", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    return SampledSet{detail::random_set_around(p, detail::SimpleKind::Ball, rng), around(p)};
  });
  out.emplace_back("box", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    return SampledSet{detail::random_set_around(p, detail::SimpleKind::Box, rng), around(p)};
  });
  out.emplace_back("affine", [=](std::mt19937_64& rng) {
    const Eigen::Index m = dim(rng);
    const auto k = static_cast<Eigen::Index>(1 + uniform_index(static_cast<std::size_t>(m - 1), rng));
    Eigen::MatrixXd raw(m, k);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) raw(r, c) = standard_normal(rng);
    }
    const Eigen::MatrixXd basis = raw.householderQr().householderQ() * Eigen::MatrixXd::Identity(m, k);
    const Vector a = anchor(m, rng);
    auto inside = [a, basis](std::mt19937_64& g) -> Vector {
      return a + basis * random_point(basis.cols(), 3.0, g);
    };
    return SampledSet{Affine{a, basis}, inside};
  });
  out.emplace_back("polyhedron-2", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    return SampledSet{Polyhedron{{random_face(p, rng), random_face(p, rng)}}, around(p)};
  });
  out.emplace_back("polyhedron", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    Polyhedron poly;
    const std::size_t faces = 3 + uniform_index(3, rng);
    for (std::size_t f = 0; f < faces; ++f) poly.faces.push_back(random_face(p, rng));
    return SampledSet{poly, around(p)};
  });
  out.emplace_back("intersection", [=](std::mt19937_64& rng) {
    const Vector p = anchor(dim(rng), rng);
    Intersection in;
    in.tolerance = 1e-12;
    in.members = {detail::random_set_around(p, detail::SimpleKind::Ball, rng),
                  detail::random_set_around(p, detail::SimpleKind::Box, rng), random_face(p, rng)};
    return SampledSet{in, around(p)};
  });
  return out;
}

double sqdist(const ConvexSet& set, const Vector& x) {
  const double d = distance(set, x);
  return d * d;
}

SuiteResult projector_axioms(const SuiteOptions& options) {
  const auto variants = axiom_variants();
  std::vector<std::vector<SuiteCheck>> per_variant(variants.size());
  parallel_for(variants.size(), options.threads, [&](std::size_t v) {
    const auto& [name, make] = variants[v];
    std::mt19937_64 rng(0x5EED0000 + v);
    Tally nonexpansive;
    Tally variational;
    Tally gradient;
    Tally lemma_weak;
    Tally lemma_strict;
    for (std::size_t k = 0; k < kAxiomSamples; ++k) {
      {
        const SampledSet s = make(rng);
        const auto m = static_cast<Eigen::Index>(dimension(s.set));
        const Vector x = random_point(m, 6.0, rng);
        const Vector y = random_point(m, 6.0, rng);
        nonexpansive.add((project(s.set, x) - project(s.set, y)).norm() - (x - y).norm(), kAxiomSlack);
      }
      {
        const SampledSet s = make(rng);
        const auto m = static_cast<Eigen::Index>(dimension(s.set));
        const Vector x = random_point(m, 6.0, rng);
        // alternate deep interior points with boundary points
        Vector y = k % 2 == 0 ? s.inside(rng) : project(s.set, random_point(m, 6.0, rng));
        if (!contains(s.set, y)) y = s.inside(rng);
        const Vector px = project(s.set, x);
        variational.add((px - x).dot(px - y), kAxiomSlack);
      }
      {
        const SampledSet s = make(rng);
        const auto m = static_cast<Eigen::Index>(dimension(s.set));
        Vector x = random_point(m, 6.0, rng);
        for (int tries = 0; distance(s.set, x) < 0.1 && tries < 1000; ++tries) x = random_point(m, 6.0, rng);
        if (distance(s.set, x) >= 0.1) {
          const Vector g = sqdist_gradient(s.set, x);
          Vector fd(m);
          const double h = 1e-5;
          for (Eigen::Index c = 0; c < m; ++c) {
            Vector up = x;
            Vector down = x;
            up(c) += h;
            down(c) -= h;
            fd(c) = (sqdist(s.set, up) - sqdist(s.set, down)) / (2.0 * h);
          }
          gradient.add((fd - g).norm() / g.norm(), kGradientRelError);
        }
      }
      {
        const SampledSet s = make(rng);
        const auto m = static_cast<Eigen::Index>(dimension(s.set));
        const Vector xa = random_point(m, 6.0, rng);
        const Vector xb = random_point(m, 6.0, rng);
        const double da = distance(s.set, xa);
        const double db = distance(s.set, xb);
        const double lhs = (xa - project(s.set, xa)).dot(xb - xa);
        lemma_weak.add(lhs - da * std::abs(da - db), kAxiomSlack);
        if (da > db) lemma_strict.add(lhs + da * (da - db), kAxiomSlack);
      }
    }
    per_variant[v] = {nonexpansive.as_check(name + "/nonexpansive", kAxiomSlack),
                      variational.as_check(name + "/variational-inequality", kAxiomSlack),
                      gradient.as_check(name + "/gradient-identity", kGradientRelError),
                      lemma_weak.as_check(name + "/distance-inequality", kAxiomSlack),
                      lemma_strict.as_check(name + "/distance-inequality-strict", kAxiomSlack)};
  });
  SuiteResult result{"projector-axioms", {}, nlohmann::json::object()};
  for (auto& checks : per_variant) {
    for (auto& c : checks) result.checks.push_back(std::move(c));
  }
  result.details["samples_per_axiom"] = kAxiomSamples;
  return result;
}

// ---- oracle equivalence ----------------------------------------------------

SuiteResult oracle_equivalence(const SuiteOptions&) {
  SuiteResult result{"oracle-equivalence", {}, nlohmann::json::object()};
  std::mt19937_64 rng(0x0AC1E);
  const IntersectionOracle orthant{{Halfspace{Eigen::Vector2d(-1.0, 0.0), 0.0}, Halfspace{Eigen::Vector2d(0.0, -1.0), 0.0}}};
  const IntersectionOracle tangent{{Ball{Eigen::Vector2d(0.0, 0.0), 1.0}, Ball{Eigen::Vector2d(2.0, 0.0), 1.0}}};
  double orthant_err = 0.0;
  double tangent_err = 0.0;
  for (std::size_t k = 0; k < kOracleSamples; ++k) {
    const Vector x = random_point(2, 5.0, rng);
    orthant_err = std::max(orthant_err, (dykstra_project(orthant, x) - x.cwiseMax(0.0)).norm());
    const Vector z = random_point(2, 5.0, rng);
    tangent_err = std::max(tangent_err, (dykstra_project(tangent, z) - Eigen::Vector2d(1.0, 0.0)).norm());
  }
  result.checks.push_back(make_check("orthant", orthant_err <= 1e-6, orthant_err, 1e-6,
                                     fmt::format("max error over {} points", kOracleSamples)));
  result.checks.push_back(make_check("two-ball-singleton", tangent_err <= 1e-6, tangent_err, 1e-6,
                                     fmt::format("max error over {} points", kOracleSamples)));
  return result;
}

// ---- scenario families -----------------------------------------------------

Scenario lemma41_scenario(std::size_t k) {
  const std::size_t agents = 2 + k % 5;
  const std::size_t dim = 1 + (k / 5) % 3;
  return make_random_feasible(agents, dim, 1000 + k);
}

Scenario eq39_scenario(std::size_t k) {
  return make_symmetric_feasible(2 + k % 4, 2, 3000 + k);
}

std::vector<double> d_series(const DistanceTable& table) {
  std::vector<double> d(static_cast<std::size_t>(table.to_common.rows()));
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = table.d(k);
  return d;
}

SuiteResult lemma41(const SuiteOptions& options) {
  struct Row {
    std::size_t agents = 0;
    std::size_t dimension = 0;
    double d0 = 0.0;
    double max_d = 0.0;
    double tol = 0.0;
    std::size_t violations = 0;
    double worst_increase = 0.0;
  };
  std::vector<Row> rows(kLemma41Scenarios);
  parallel_for(rows.size(), options.threads, [&](std::size_t k) {
    const Scenario s = lemma41_scenario(k);
    const FlowModel model = build_model(s);
    const Trajectory traj = simulate(model, s.initial, s.integrator);
    const DistanceTable table = tabulate_distances(traj, s.sets, common_oracle(s));
    const std::vector<double> d = d_series(table);
    Row& r = rows[k];
    r.agents = s.agents;
    r.dimension = s.dimension;
    r.d0 = d.front();
    r.max_d = *std::max_element(d.begin(), d.end());
    r.tol = monotone_tolerance(lipschitz_bound(model), s.integrator.step, r.d0);
    const auto violations = check_monotone_d(traj.times, d, r.tol);
    r.violations = violations.size();
    for (std::size_t i = 1; i < d.size(); ++i) r.worst_increase = std::max(r.worst_increase, d[i] - d[i - 1]);
  });

  SuiteResult result{"lemma41", {}, nlohmann::json::object()};
  std::size_t violations = 0;
  double sublevel_excess = -std::numeric_limits<double>::infinity();
  nlohmann::json scenarios = nlohmann::json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    violations += r.violations;
    sublevel_excess = std::max(sublevel_excess, r.max_d - r.d0 - r.tol);
    scenarios.push_back({{"index", k},
                         {"N", r.agents},
                         {"m", r.dimension},
                         {"d0", r.d0},
                         {"max_d", r.max_d},
                         {"tol_mono", r.tol},
                         {"largest_increase", r.worst_increase},
                         {"violations", r.violations}});
  }
  result.checks.push_back(make_check("monotonicity-violations", violations == 0, static_cast<double>(violations), 0.0,
                                     fmt::format("forward differences of d above tol_mono over {} scenarios",
                                                 rows.size())));
  result.checks.push_back(make_check("sublevel-set", sublevel_excess <= 0.0, sublevel_excess, 0.0,
                                     "max_t d(t) - d(0) - tol_mono, worst scenario"));
  result.details["scenarios"] = std::move(scenarios);
  return result;
}

SuiteResult theorem31(const SuiteOptions&) {
  SuiteResult result{"theorem31", {}, nlohmann::json::object()};
  const Scenario s = make_reference_ujsc(4, 2, 7);
  const FlowModel model = build_model(s);
  const IntersectionOracle oracle = common_oracle(s);
  const double window = static_cast<double>(s.agents) * 1.0;
  const CertificationReport cert = certify_ujsc(model.topology, window);
  result.checks.push_back(make_check("ujsc-certified", cert.pass, cert.pass ? 1.0 : 0.0, 1.0,
                                     fmt::format("window T = {}", window)));
  const Trajectory traj = simulate(model, s.initial, s.integrator);
  const auto converged = detect_convergence(traj, oracle, 1e-3);
  result.checks.push_back(make_check("converged", converged.has_value(), converged.value_or(kNaN),
                                     s.integrator.t_end, "detect_convergence(tol = 1e-3)"));
  const TailStatistics tail = tail_statistics(traj, s.sets, oracle, 0.1);
  result.checks.push_back(make_check("tail-own-distance", tail.max_own() <= 1e-3, tail.max_own(), 1e-3,
                                     fmt::format("max |x_i|_Xi over [{}, {}]", tail.window_start, s.integrator.t_end)));
  result.details["scenario_hash"] = scenario_hash(s);
  return result;
}

SuiteResult theorem32(const SuiteOptions&) {
  SuiteResult result{"theorem32", {}, nlohmann::json::object()};
  const double growth = 2.0;
  const Scenario s = make_reference_ijc(4, 2, 7, growth);
  const auto& grow = std::get<GrowingIntervalsTopology>(s.topology.kind);
  const FlowModel model = build_model(s);
  const IntersectionOracle oracle = common_oracle(s);
  result.checks.push_back(make_check("interval-count", grow.intervals >= 6, static_cast<double>(grow.intervals), 6.0,
                                     fmt::format("horizon {}", s.topology.horizon)));
  const CertificationReport ijc = certify_ijc(model.topology);
  result.checks.push_back(
      make_check("ijc-certified", ijc.pass, ijc.pass ? 1.0 : 0.0, 1.0, ijc.note));
  const CertificationReport ujsc = certify_ujsc(model.topology, grow.base);
  result.checks.push_back(make_check("ujsc-fails-at-base", !ujsc.pass, ujsc.pass ? 1.0 : 0.0, 0.0,
                                     fmt::format("window T = base = {}", grow.base)));
  const Trajectory traj = simulate(model, s.initial, s.integrator);
  const auto converged = detect_convergence(traj, oracle, 1e-2);
  result.checks.push_back(make_check("converged", converged.has_value(), converged.value_or(kNaN),
                                     s.integrator.t_end, "detect_convergence(tol = 1e-2)"));
  result.details["scenario_hash"] = scenario_hash(s);
  result.details["final_diameter"] = spread_of(traj.states.back()).diameter;
  return result;
}

SuiteResult counterexample(const SuiteOptions&) {
  SuiteResult result{"counterexample", {}, nlohmann::json::object()};
  const Scenario s = make_counterexample(7);
  const ValidationReport validation = validate_scenario(s);
  result.checks.push_back(make_check("assumptions-hold", validation.all_pass(), validation.all_pass() ? 1.0 : 0.0, 1.0,
                                     validation.all_pass() ? "A1-A4 pass" : validation.failures()));
  const FlowModel model = build_model(s);
  const IntersectionOracle oracle = common_oracle(s);
  const bool ujsc = certify_ujsc(model.topology, 1.0).pass;
  const bool ijc = certify_ijc(model.topology).pass;
  result.checks.push_back(make_check("certifications-fail", !ujsc && !ijc, (ujsc ? 1.0 : 0.0) + (ijc ? 1.0 : 0.0), 0.0,
                                     "UJSC (T = 1) and IJC both fail"));
  const Trajectory traj = simulate(model, s.initial, s.integrator);
  const auto converged = detect_convergence(traj, oracle, 1e-3);
  result.checks.push_back(make_check("no-convergence", !converged.has_value(), converged.value_or(kNaN), kNaN,
                                     "detect_convergence(tol = 1e-3) must be absent"));
  const StateMatrix& last = traj.states.back();
  const double diameter = spread_of(last).diameter;
  result.checks.push_back(make_check("terminal-diameter", diameter >= 1.9 && diameter <= 2.0, diameter, 2.0,
                                     "must lie in [1.9, 2.0]"));
  const double err = std::max((Vector(last.col(0)) - Eigen::Vector2d(1.0, 0.0)).norm(),
                              (Vector(last.col(1)) - Eigen::Vector2d(-1.0, 0.0)).norm());
  result.checks.push_back(make_check("analytic-limits", err <= 1e-3, err, 1e-3, "distance to (1, 0) and (-1, 0)"));
  const DistanceTable table = tabulate_distances(traj, s.sets, oracle);
  const std::vector<double> d = d_series(table);
  const double tol = monotone_tolerance(lipschitz_bound(model), s.integrator.step, d.front());
  const std::size_t violations = check_monotone_d(traj.times, d, tol).size();
  result.checks.push_back(make_check("d-nonincreasing", violations == 0, static_cast<double>(violations), 0.0,
                                     "monotonicity violations of d"));
  return result;
}

SuiteResult eq39(const SuiteOptions& options) {
  struct Row {
    std::size_t agents = 0;
    bool applies = false;
    double integral = 0.0;
    double bound = 0.0;
  };
  std::vector<Row> rows(kEq39Scenarios);
  parallel_for(rows.size(), options.threads, [&](std::size_t k) {
    const Scenario s = eq39_scenario(k);
    const FlowModel model = build_model(s);
    const Trajectory traj = simulate(model, s.initial, s.integrator);
    const DistanceTable table = tabulate_distances(traj, s.sets, common_oracle(s));
    Row& r = rows[k];
    r.agents = s.agents;
    r.applies = integral_bound_applies(model);
    r.integral = barbalat_integral(traj.times, table);
    r.bound = static_cast<double>(s.agents) * table.d(0) / 2.0;
  });

  SuiteResult result{"eq39", {}, nlohmann::json::object()};
  bool all_apply = true;
  double worst_ratio = 0.0;
  nlohmann::json scenarios = nlohmann::json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    all_apply = all_apply && r.applies;
    double ratio = 0.0;
    if (r.bound > 0.0) {
      ratio = r.integral / r.bound;
    } else if (r.integral > 0.0) {
      ratio = std::numeric_limits<double>::infinity();
    }
    worst_ratio = std::max(worst_ratio, ratio);
    scenarios.push_back({{"index", k}, {"N", r.agents}, {"integral", r.integral}, {"bound", r.bound}});
  }
  result.checks.push_back(make_check("family-is-symmetric", all_apply, all_apply ? 1.0 : 0.0, 1.0,
                                     "bidirectional pieces, symmetric weights, unit gains"));
  result.checks.push_back(make_check("integral-bound", worst_ratio <= 1.05, worst_ratio, 1.05,
                                     "worst integral / (N d(0) / 2)"));

  const double t_end = 10.0;
  const Scenario single = make_single_agent_ball(t_end);
  const Trajectory traj = simulate(single);
  const double integral = barbalat_integral(traj, single.sets);
  const double exact = 0.5 * (1.0 - std::exp(-2.0 * t_end));
  const double err = std::abs(integral - exact);
  result.checks.push_back(make_check("single-agent-analytic", err <= 1e-4, err, 1e-4,
                                     fmt::format("integral {:.10f} vs {:.10f}", integral, exact)));
  result.details["scenarios"] = std::move(scenarios);
  return result;
}

SuiteResult delta_containment(const SuiteOptions&) {
  SuiteResult result{"delta-containment", {}, nlohmann::json::object()};
  const Scenario s = make_reference_ujsc(4, 2, 7);
  const IntersectionOracle oracle = common_oracle(s);
  const Trajectory traj = simulate(s);
  std::vector<double> times;
  for (double t = 0.0; t <= s.integrator.t_end + 1e-9; t += 5.0) times.push_back(t);
  const auto records = check_delta_containment(traj, oracle, times);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t flagged = 0;
  for (const auto& r : records) {
    worst = std::max(worst, r.excess);
    if (r.flagged) ++flagged;
  }
  result.checks.push_back(make_check("trajectory-containment", flagged == 0, worst, kContainmentTolerance,
                                     fmt::format("{} flagged of {} pairs", flagged, records.size())));

  std::mt19937_64 rng(0xDE17A);
  Tally sampled;
  for (std::size_t k = 0; k < kAxiomSamples; ++k) {
    std::vector<Vector> generators;
    for (std::size_t j = 0; j < s.agents; ++j) generators.push_back(random_point(2, 6.0, rng));
    const Vector y = sample_delta_point(generators, s.sets, 4, rng);
    double reach = 0.0;
    for (const auto& g : generators) reach = std::max(reach, distance(oracle, g));
    sampled.add(hull_distance(generators, y) - 2.0 * reach, 1e-6);
  }
  result.checks.push_back(sampled.as_check("sampled-delta-points", 1e-6));
  return result;
}

SuiteResult analytic(const SuiteOptions&) {
  SuiteResult result{"analytic", {}, nlohmann::json::object()};
  const Scenario s = make_single_agent_ball(1.0);
  const Trajectory traj = simulate(s);
  const Vector end = traj.states.back().col(0);
  const double err = (end - Eigen::Vector2d(1.0 + std::exp(-1.0), 0.0)).norm();
  result.checks.push_back(make_check("rk4-single-ball", err <= 1e-6, err, 1e-6, "x(1) vs (1 + e^-1, 0)"));
  return result;
}

SuiteResult determinism(const SuiteOptions& options) {
  std::vector<std::pair<std::string, std::function<Scenario()>>> jobs;
  jobs.emplace_back("ujsc", [] { return make_reference_ujsc(4, 2, 7); });
  jobs.emplace_back("ijc", [] { return make_reference_ijc(4, 2, 7, 2.0); });
  jobs.emplace_back("counterexample", [] { return make_counterexample(7); });
  jobs.emplace_back("single-ball-1", [] { return make_single_agent_ball(1.0); });
  jobs.emplace_back("single-ball-10", [] { return make_single_agent_ball(10.0); });
  for (std::size_t k = 0; k < kLemma41Scenarios; ++k) {
    jobs.emplace_back(fmt::format("lemma41-{}", k), [k] { return lemma41_scenario(k); });
  }
  for (std::size_t k = 0; k < kEq39Scenarios; ++k) {
    jobs.emplace_back(fmt::format("eq39-{}", k), [k] { return eq39_scenario(k); });
  }

  std::vector<std::pair<bool, std::string>> outcome(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t k) {
    const Scenario s = jobs[k].second();
    const IntersectionOracle oracle = common_oracle(s);
    const std::string first = trajectory_csv(simulate(s), s.sets, oracle);
    const std::string second = trajectory_csv(simulate(jobs[k].second()), s.sets, oracle);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : first) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    outcome[k] = {first == second, fmt::format("{:016x}", h)};
  });

  SuiteResult result{"determinism", {}, nlohmann::json::object()};
  std::size_t mismatches = 0;
  nlohmann::json hashes = nlohmann::json::object();
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!outcome[k].first) ++mismatches;
    hashes[jobs[k].first] = outcome[k].second;
  }
  result.checks.push_back(make_check("byte-identical-csv", mismatches == 0, static_cast<double>(mismatches), 0.0,
                                     fmt::format("{} scenarios run twice", jobs.size())));
  result.details["csv_fnv1a"] = std::move(hashes);
  return result;
}

using SuiteFn = SuiteResult (*)(const SuiteOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> suites = {
      {"projector-axioms", projector_axioms},
      {"oracle-equivalence", oracle_equivalence},
      {"lemma41", lemma41},
      {"theorem31", theorem31},
      {"theorem32", theorem32},
      {"counterexample", counterexample},
      {"eq39", eq39},
      {"delta-containment", delta_containment},
      {"analytic", analytic},
      {"determinism", determinism},
  };
  return suites;
}

}  // namespace

bool SuiteResult::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.first);
    return out;
  }();
  return names;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
  for (const auto& [suite, fn] : registry()) {
    if (suite == name) return fn(options);
  }
  std::string known;
  for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
  throw InputError("unknown suite '" + name + "' (known: " + known + ")");
}

nlohmann::json scorecard(const SuiteResult& result) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : result.checks) {
    nlohmann::json entry = {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}};
    entry["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
    entry["limit"] = std::isfinite(c.limit) ? nlohmann::json(c.limit) : nlohmann::json(nullptr);
    checks.push_back(std::move(entry));
  }
  return {{"schema_version", kScorecardSchemaVersion},
          {"suite", result.suite},
          {"pass", result.pass()},
          {"checks", std::move(checks)},
          {"details", result.details}};
}

}  // namespace optflow
