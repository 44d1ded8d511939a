#include "optflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool symmetric(const Eigen::MatrixXd& m) { return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() == 0.0; }

double max_common_distance(const StateMatrix& x, const IntersectionOracle& oracle) {
  double worst = 0.0;
  Vector agent(x.rows());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    agent = x.col(i);
    worst = std::max(worst, distance(oracle, agent));
  }
  return worst;
}

std::vector<Vector> columns(const StateMatrix& x) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) out.emplace_back(x.col(i));
  return out;
}

}  // namespace

double d_of(const StateMatrix& x, const IntersectionOracle& oracle) {
  const double r = max_common_distance(x, oracle);
  return r * r;
}

Spread spread_of(const StateMatrix& x) {
  if (x.cols() == 0) throw InputError("spread of an empty network");
  Spread s;
  s.per_coordinate = x.rowwise().maxCoeff() - x.rowwise().minCoeff();
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
      s.diameter = std::max(s.diameter, (x.col(i) - x.col(j)).norm());
    }
  }
  return s;
}

double DistanceTable::d(std::size_t k) const {
  const double r = to_common.row(static_cast<Eigen::Index>(k)).maxCoeff();
  return r * r;
}

DistanceTable tabulate_distances(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                                 const IntersectionOracle& oracle) {
  const auto samples = static_cast<Eigen::Index>(traj.size());
  const auto agents = static_cast<Eigen::Index>(traj.agents());
  if (static_cast<std::size_t>(agents) != sets.size()) throw InputError("set count differs from agent count");
  DistanceTable table;
  table.to_own.resize(samples, agents);
  table.to_common.resize(samples, agents);
  Vector agent(static_cast<Eigen::Index>(traj.dimension()));
  for (Eigen::Index k = 0; k < samples; ++k) {
    const StateMatrix& x = traj.states[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < agents; ++i) {
      agent = x.col(i);
      table.to_own(k, i) = distance(sets[static_cast<std::size_t>(i)], agent);
      table.to_common(k, i) = distance(oracle, agent);
    }
  }
  return table;
}

double monotone_tolerance(double lipschitz, double step, double d0) {
  return 1e-6 + 10.0 * lipschitz * lipschitz * d0 * step * step;
}

std::vector<MonotonicityViolation> check_monotone_d(const std::vector<double>& times, const std::vector<double>& d,
                                                    double tol_mono) {
  if (times.size() != d.size()) throw InputError("times and d differ in length");
  std::vector<MonotonicityViolation> out;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double rise = d[k + 1] - d[k];
    if (rise > tol_mono) out.push_back({times[k + 1], rise});
  }
  return out;
}

std::vector<MonotonicityViolation> check_monotone_d(const Trajectory& traj, const IntersectionOracle& oracle,
                                                    double tol_mono) {
  if (traj.size() == 0) throw InputError("empty trajectory");
  std::vector<double> d;
  d.reserve(traj.size());
  for (const auto& x : traj.states) d.push_back(d_of(x, oracle));
  return check_monotone_d(traj.times, d, tol_mono);
}

double barbalat_integral(const std::vector<double>& times, const DistanceTable& table) {
  double total = 0.0;
  auto integrand = [&](std::size_t k) { return table.to_own.row(static_cast<Eigen::Index>(k)).squaredNorm(); };
  double previous = times.empty() ? 0.0 : integrand(0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double current = integrand(k);
    total += 0.5 * (times[k] - times[k - 1]) * (previous + current);
    previous = current;
  }
  return total;
}

double barbalat_integral(const Trajectory& traj, const std::vector<ConvexSet>& sets) {
  double total = 0.0;
  Vector agent(static_cast<Eigen::Index>(traj.dimension()));
  auto integrand = [&](std::size_t k) {
    double sum = 0.0;
    const StateMatrix& x = traj.states[k];
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      agent = x.col(i);
      const double r = distance(sets[static_cast<std::size_t>(i)], agent);
      sum += r * r;
    }
    return sum;
  };
  double previous = traj.size() > 0 ? integrand(0) : 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double current = integrand(k);
    total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (previous + current);
    previous = current;
  }
  return total;
}

bool integral_bound_applies(const FlowModel& model) {
  if (!model.topology.every_piece_symmetric()) return false;
  const bool weights_symmetric =
      std::visit(overloaded{
                     [](const ConstantWeights& w) { return symmetric(w.values); },
                     [](const OscillatingWeights& w) {
                       return symmetric(w.offset) && symmetric(w.amplitude) && symmetric(w.frequency) &&
                              symmetric(w.phase);
                     },
                     [](const DistanceWeights&) { return true; },
                 },
                 model.weights.kind);
  if (!weights_symmetric) return false;
  for (std::size_t i = 0; i < model.agents(); ++i) {
    if (model.gains.at(i) < 1.0) return false;
  }
  return true;
}

std::vector<ContainmentRecord> check_delta_containment(const Trajectory& traj, const IntersectionOracle& oracle,
                                                       const std::vector<double>& check_times, double tolerance) {
  if (traj.size() == 0) throw InputError("empty trajectory");
  const double first = traj.times.front();
  const double last = traj.times.back();
  std::vector<double> sorted = check_times;
  std::sort(sorted.begin(), sorted.end());
  for (double t : sorted) {
    if (t < first - 1e-9 || t > last + 1e-9) {
      throw InputError(fmt::format("check time {} outside trajectory span [{}, {}]", t, first, last));
    }
  }

  std::vector<ContainmentRecord> out;
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    const StateMatrix& base = traj.states[traj.nearest_sample(sorted[a])];
    const std::vector<Vector> generators = columns(base);
    const double allowance = 2.0 * max_common_distance(base, oracle);
    for (std::size_t b = a; b < sorted.size(); ++b) {
      const StateMatrix& later = traj.states[traj.nearest_sample(sorted[b])];
      double gap = 0.0;
      for (Eigen::Index i = 0; i < later.cols(); ++i) {
        gap = std::max(gap, hull_distance(generators, Vector(later.col(i))));
      }
      ContainmentRecord r;
      r.t = sorted[a];
      r.t_hat = sorted[b];
      r.hull_gap = gap;
      r.allowance = allowance;
      r.excess = gap - allowance;
      r.flagged = r.excess > tolerance;
      out.push_back(r);
    }
  }
  return out;
}

std::optional<double> detect_convergence(const Trajectory& traj, const IntersectionOracle& oracle, double tol) {
  if (!(tol > 0.0)) throw InputError("convergence tolerance must be positive");
  if (traj.size() == 0) return std::nullopt;
  // Scan backwards; the answer is the sample after the last failure.
  std::size_t k = traj.size();
  while (k > 0) {
    const StateMatrix& x = traj.states[k - 1];
    const bool agreed = spread_of(x).diameter <= tol;
    if (!agreed || max_common_distance(x, oracle) > tol) break;
    --k;
  }
  if (k == traj.size()) return std::nullopt;
  return traj.times[k];
}

double TailStatistics::max_own() const {
  return max_dist_own.empty() ? 0.0 : *std::max_element(max_dist_own.begin(), max_dist_own.end());
}

TailStatistics tail_statistics(const Trajectory& traj, const std::vector<ConvexSet>& sets,
                               const IntersectionOracle& oracle, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw InputError("tail fraction must lie in (0, 1]");
  if (traj.size() == 0) throw InputError("empty trajectory");
  const std::size_t n = traj.agents();
  TailStatistics stats;
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  stats.window_start = t1 - tail_fraction * (t1 - t0);
  stats.max_dist_own.assign(n, 0.0);
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  Vector agent(static_cast<Eigen::Index>(traj.dimension()));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.times[k] < stats.window_start - 1e-12) continue;
    const StateMatrix& x = traj.states[k];
    for (std::size_t i = 0; i < n; ++i) {
      agent = x.col(static_cast<Eigen::Index>(i));
      stats.max_dist_own[i] = std::max(stats.max_dist_own[i], distance(sets[i], agent));
      const double r = distance(oracle, agent);
      lo[i] = std::min(lo[i], r * r);
      hi[i] = std::max(hi[i], r * r);
    }
  }
  stats.d_range.resize(n);
  for (std::size_t i = 0; i < n; ++i) stats.d_range[i] = hi[i] - lo[i];
  return stats;
}

std::size_t MetricsReport::containment_flags() const {
  return static_cast<std::size_t>(std::count_if(delta_containment.begin(), delta_containment.end(),
                                                [](const ContainmentRecord& r) { return r.flagged; }));
}

MetricsReport compute_metrics(const Trajectory& traj, const FlowModel& model, const IntersectionOracle& oracle,
                              const MetricsOptions& options) {
  if (traj.size() == 0) throw InputError("empty trajectory");
  MetricsReport report;
  const DistanceTable table = tabulate_distances(traj, model.sets, oracle);

  std::vector<double> d(traj.size());
  report.samples.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    MetricsSample s;
    s.t = traj.times[k];
    s.d = table.d(k);
    const Spread spread = spread_of(traj.states[k]);
    s.spread = spread.per_coordinate;
    s.h_max = spread.per_coordinate.maxCoeff();
    s.diameter = spread.diameter;
    s.dist_own.resize(traj.agents());
    s.dist_common.resize(traj.agents());
    for (std::size_t i = 0; i < traj.agents(); ++i) {
      s.dist_own[i] = table.to_own(row, static_cast<Eigen::Index>(i));
      s.dist_common[i] = table.to_common(row, static_cast<Eigen::Index>(i));
    }
    d[k] = s.d;
    report.samples.push_back(std::move(s));
  }

  report.d0 = d.front();
  report.max_d = *std::max_element(d.begin(), d.end());
  report.tol_mono = monotone_tolerance(lipschitz_bound(model), options.step, report.d0);
  report.monotonicity_violations = check_monotone_d(traj.times, d, report.tol_mono);

  report.barbalat.integral = barbalat_integral(traj.times, table);
  report.barbalat.bound = static_cast<double>(model.agents()) * report.d0 / 2.0;
  report.barbalat.guaranteed = integral_bound_applies(model);
  report.barbalat.note = report.barbalat.guaranteed
                             ? "bidirectional, symmetric weights: integral < N d(0) / 2 expected"
                             : "bound not guaranteed (directed links, asymmetric weights or gains below 1)";

  if (options.containment_every > 0.0) {
    std::vector<double> checks;
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    for (std::size_t k = 0;; ++k) {
      const double t = t0 + static_cast<double>(k) * options.containment_every;
      if (t > t1 + 1e-9) break;
      checks.push_back(std::min(t, t1));
    }
    report.delta_containment = check_delta_containment(traj, oracle, checks);
  }

  // backward scan on the tabulated distances
  std::size_t k = traj.size();
  while (k > 0) {
    const MetricsSample& s = report.samples[k - 1];
    const double worst = *std::max_element(s.dist_common.begin(), s.dist_common.end());
    if (s.diameter > options.convergence_tol || worst > options.convergence_tol) break;
    --k;
  }
  if (k < traj.size()) report.converged_at = traj.times[k];

  report.tail = tail_statistics(traj, model.sets, oracle, options.tail_fraction);
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  using nlohmann::json;
  json j;
  j["d0"] = report.d0;
  j["max_d"] = report.max_d;
  j["tol_mono"] = report.tol_mono;
  j["sublevel_invariant"] = report.sublevel_holds();
  json violations = json::array();
  for (const auto& v : report.monotonicity_violations) violations.push_back({{"t", v.t}, {"increase", v.increase}});
  j["monotonicity_violations"] = violations;
  j["barbalat"] = {{"integral", report.barbalat.integral},
                   {"bound", report.barbalat.bound},
                   {"guaranteed", report.barbalat.guaranteed},
                   {"note", report.barbalat.note}};
  json containment = json::array();
  for (const auto& r : report.delta_containment) {
    containment.push_back({{"t", r.t},
                           {"t_hat", r.t_hat},
                           {"hull_gap", r.hull_gap},
                           {"allowance", r.allowance},
                           {"excess", r.excess},
                           {"flagged", r.flagged}});
  }
  j["delta_containment"] = containment;
  j["converged_at"] = report.converged_at ? json(*report.converged_at) : json(nullptr);
  j["tail"] = {{"window_start", report.tail.window_start},
               {"max_dist_own", report.tail.max_dist_own},
               {"d_range", report.tail.d_range}};
  const MetricsSample& last = report.samples.back();
  j["terminal"] = {{"t", last.t}, {"d", last.d}, {"diameter", last.diameter}, {"h_max", last.h_max}};
  return j;
}

std::string summary_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "t,d,H_max,diam,max_dist_Xi\n";
  for (const auto& s : report.samples) {
    const double own = s.dist_own.empty() ? 0.0 : *std::max_element(s.dist_own.begin(), s.dist_own.end());
    out << fmt::format("{:.9f},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.d, s.h_max, s.diameter, own);
  }
  return out.str();
}

}  // namespace optflow
