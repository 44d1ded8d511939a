#include "optflow/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "optflow/errors.hpp"
#include "optflow/random.hpp"

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Nodes reachable from `root` following arcs forward (or backward).
std::vector<bool> reach(const DigraphSnapshot& g, std::size_t root, bool forward) {
  std::vector<std::vector<std::size_t>> adj(g.node_count());
  for (const Arc& a : g.arcs()) {
    if (forward) {
      adj[a.from].push_back(a.to);
    } else {
      adj[a.to].push_back(a.from);
    }
  }
  std::vector<bool> seen(g.node_count(), false);
  std::queue<std::size_t> frontier;
  seen[root] = true;
  frontier.push(root);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
    }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

DigraphSnapshot random_graph(std::size_t n, double p, bool symmetric, std::mt19937_64& rng) {
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (symmetric && j < i)) continue;
      if (uniform01(rng) < p) {
        arcs.push_back({i, j});
        if (symmetric) arcs.push_back({j, i});
      }
    }
  }
  return DigraphSnapshot(n, std::move(arcs));
}

}  // namespace

DigraphSnapshot::DigraphSnapshot(std::size_t n, std::vector<Arc> arcs) : n_(n), arcs_(std::move(arcs)) {
  for (const Arc& a : arcs_) {
    if (a.from >= n_ || a.to >= n_) {
      throw InputError("arc (" + std::to_string(a.from) + "," + std::to_string(a.to) +
                       ") out of range for " + std::to_string(n_) + " nodes");
    }
    if (a.from == a.to) throw InputError("self-loop at node " + std::to_string(a.from));
  }
  std::sort(arcs_.begin(), arcs_.end());
  arcs_.erase(std::unique(arcs_.begin(), arcs_.end()), arcs_.end());
}

bool DigraphSnapshot::has_arc(std::size_t from, std::size_t to) const {
  return std::binary_search(arcs_.begin(), arcs_.end(), Arc{from, to});
}

bool DigraphSnapshot::is_symmetric() const {
  return std::all_of(arcs_.begin(), arcs_.end(), [&](const Arc& a) { return has_arc(a.to, a.from); });
}

DigraphSnapshot DigraphSnapshot::united(const DigraphSnapshot& other) const {
  if (other.n_ != n_) throw InputError("cannot unite graphs with different node counts");
  std::vector<Arc> merged;
  merged.reserve(arcs_.size() + other.arcs_.size());
  std::set_union(arcs_.begin(), arcs_.end(), other.arcs_.begin(), other.arcs_.end(),
                 std::back_inserter(merged));
  DigraphSnapshot g;
  g.n_ = n_;
  g.arcs_ = std::move(merged);
  return g;
}

std::vector<std::size_t> neighbors(const DigraphSnapshot& g, std::size_t i) {
  if (i >= g.node_count()) throw InputError("node " + std::to_string(i) + " out of range");
  std::vector<std::size_t> out;
  for (const Arc& a : g.arcs()) {
    if (a.to == i) out.push_back(a.from);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_strongly_connected(const DigraphSnapshot& g) {
  if (g.node_count() == 0) throw InputError("strong connectivity of an empty graph");
  return all_true(reach(g, 0, true)) && all_true(reach(g, 0, false));
}

bool is_connected_bidirectional(const DigraphSnapshot& g) {
  if (g.node_count() == 0) throw InputError("connectivity of an empty graph");
  if (!g.is_symmetric()) throw InputError("graph is not bidirectional");
  return all_true(reach(g, 0, true));
}

SwitchingTopology::SwitchingTopology(std::vector<TopologyPiece> pieces, double dwell, double horizon)
    : pieces_(std::move(pieces)), dwell_(dwell), horizon_(horizon) {
  if (pieces_.empty()) throw InputError("topology needs at least one piece");
  if (!(dwell_ > 0.0) || !std::isfinite(dwell_)) throw InputError("dwell time must be positive");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw InputError("horizon must be positive");
  if (pieces_.front().start != 0.0) throw InputError("first piece must start at t = 0");
  const std::size_t n = pieces_.front().graph.node_count();
  const double slack = 1e-9 * std::max(1.0, dwell_);
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (pieces_[k].graph.node_count() != n) throw InputError("pieces differ in node count");
    if (pieces_[k].start >= horizon_) throw InputError("piece starts at or after the horizon");
    if (k == 0) continue;
    const double gap = pieces_[k].start - pieces_[k - 1].start;
    if (!(gap > 0.0)) throw InputError("piece start times must strictly increase");
    if (gap < dwell_ - slack) {
      throw InputError("switch at t=" + std::to_string(pieces_[k].start) + " violates dwell time " +
                       std::to_string(dwell_) + " (gap " + std::to_string(gap) + ")");
    }
  }
}

std::size_t SwitchingTopology::piece_index(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw InputError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double value, const TopologyPiece& p) { return value < p.start; });
  return static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
}

double SwitchingTopology::piece_end(std::size_t k) const {
  return k + 1 < pieces_.size() ? pieces_[k + 1].start : horizon_;
}

const DigraphSnapshot& SwitchingTopology::snapshot_at(double t) const { return pieces_[piece_index(t)].graph; }

DigraphSnapshot SwitchingTopology::joint_graph(double t1, double t2) const {
  if (!(t1 >= 0.0 && t1 < t2 && t2 <= horizon_)) {
    throw InputError("invalid joint-graph interval [" + std::to_string(t1) + ", " + std::to_string(t2) + ")");
  }
  std::vector<Arc> arcs;
  for (std::size_t k = piece_index(t1); k < pieces_.size() && pieces_[k].start < t2; ++k) {
    const auto& a = pieces_[k].graph.arcs();
    arcs.insert(arcs.end(), a.begin(), a.end());
  }
  return DigraphSnapshot(node_count(), std::move(arcs));
}

bool SwitchingTopology::every_piece_symmetric() const {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const TopologyPiece& p) { return p.graph.is_symmetric(); });
}

CertificationReport certify_ujsc(const SwitchingTopology& topo, double window) {
  if (!(window > 0.0) || window > topo.horizon()) {
    throw InputError("UJSC window " + std::to_string(window) + " must lie in (0, horizon]");
  }
  CertificationReport report;
  report.condition = "UJSC";
  report.window = window;
  report.note =
      "window starts checked at t=0, every switch time s and s-T, and horizon-T; the joint graph "
      "only gains arcs between these points";

  const double last = topo.horizon() - window;
  std::vector<double> starts{0.0, last};
  for (const auto& p : topo.pieces()) {
    starts.push_back(p.start);
    starts.push_back(p.start - window);
  }
  std::erase_if(starts, [&](double s) { return s < 0.0 || s > last; });
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  report.pass = true;
  for (double s : starts) {
    ++report.windows_checked;
    // windows ending exactly at the horizon still cover [s, horizon)
    const double end = std::min(s + window, topo.horizon());
    if (!(end > s) || !is_strongly_connected(topo.joint_graph(s, end))) {
      report.pass = false;
      report.first_failure = std::make_pair(s, end);
      break;
    }
  }
  return report;
}

CertificationReport certify_ijc(const SwitchingTopology& topo) {
  if (!topo.every_piece_symmetric()) throw InputError("IJC certification needs bidirectional pieces");
  CertificationReport report;
  report.condition = "IJC";
  report.partition.push_back(0.0);

  const std::size_t n = topo.node_count();
  DigraphSnapshot accumulated(n, {});
  std::size_t complete = 0;
  for (std::size_t k = 0; k < topo.pieces().size(); ++k) {
    accumulated = accumulated.united(topo.pieces()[k].graph);
    if (is_connected_bidirectional(accumulated)) {
      report.partition.push_back(topo.piece_end(k));
      accumulated = DigraphSnapshot(n, {});
      ++complete;
    }
  }
  const double covered = report.partition.back();
  if (covered < topo.horizon()) report.partition.push_back(topo.horizon());

  report.windows_checked = complete;
  report.pass = complete > 0;
  if (!report.pass) report.first_failure = std::make_pair(0.0, topo.horizon());
  report.note = "finite-horizon certificate over [0, " + std::to_string(topo.horizon()) + "]: " +
                std::to_string(complete) + " jointly connected interval(s), greedy earliest completion";
  if (covered < topo.horizon()) {
    report.note += "; trailing interval [" + std::to_string(covered) + ", " + std::to_string(topo.horizon()) +
                   "] incomplete";
  }
  return report;
}

SwitchingTopology realize(const TopologySpec& spec, std::size_t node_count) {
  const double horizon = spec.horizon;
  std::vector<TopologyPiece> pieces;
  auto check_nodes = [&](const DigraphSnapshot& g) {
    if (g.node_count() != node_count) {
      throw InputError("topology graph has " + std::to_string(g.node_count()) + " nodes, expected " +
                       std::to_string(node_count));
    }
  };

  std::visit(
      overloaded{
          [&](const StaticTopology& s) {
            check_nodes(s.graph);
            pieces.push_back({0.0, s.graph});
          },
          [&](const PeriodicCycleTopology& s) {
            if (s.graphs.empty()) throw InputError("periodic cycle needs graphs");
            if (!(s.piece_length > 0.0)) throw InputError("periodic cycle piece length must be positive");
            for (const auto& g : s.graphs) check_nodes(g);
            for (std::size_t k = 0;; ++k) {
              const double start = static_cast<double>(k) * s.piece_length;
              if (start >= horizon) break;
              pieces.push_back({start, s.graphs[k % s.graphs.size()]});
            }
          },
          [&](const GrowingIntervalsTopology& s) {
            if (s.graphs.empty()) throw InputError("growing intervals need graphs");
            if (!(s.base > 0.0) || !(s.growth >= 1.0)) {
              throw InputError("growing intervals need base > 0 and growth >= 1");
            }
            if (s.intervals == 0) throw InputError("growing intervals need at least one interval");
            for (const auto& g : s.graphs) check_nodes(g);
            const auto per = static_cast<double>(s.graphs.size());
            double interval_start = 0.0;
            for (std::size_t k = 0; k < s.intervals && interval_start < horizon; ++k) {
              const double length = s.base * std::pow(s.growth, static_cast<double>(k));
              for (std::size_t j = 0; j < s.graphs.size(); ++j) {
                const double start = interval_start + static_cast<double>(j) * (length / per);
                if (start >= horizon) break;
                pieces.push_back({start, s.graphs[j]});
              }
              interval_start += length;
            }
          },
          [&](const ScriptedTopology& s) {
            for (const auto& p : s.pieces) check_nodes(p.graph);
            pieces = s.pieces;
          },
          [&](const RandomDwellTopology& s) {
            if (s.palette_size == 0) throw InputError("random dwell palette must be nonempty");
            if (!(s.min_length > 0.0) || s.max_length < s.min_length) {
              throw InputError("random dwell needs 0 < min_length <= max_length");
            }
            if (!(s.arc_probability >= 0.0 && s.arc_probability <= 1.0)) {
              throw InputError("arc probability must lie in [0, 1]");
            }
            std::mt19937_64 rng(s.seed);
            std::vector<DigraphSnapshot> palette;
            for (std::size_t k = 0; k < s.palette_size; ++k) {
              palette.push_back(random_graph(node_count, s.arc_probability, s.symmetric, rng));
            }
            double t = 0.0;
            while (t < horizon) {
              pieces.push_back({t, palette[uniform_index(palette.size(), rng)]});
              t += s.min_length + uniform01(rng) * (s.max_length - s.min_length);
            }
          },
      },
      spec.kind);

  return SwitchingTopology(std::move(pieces), spec.dwell, horizon);
}

}  // namespace optflow
