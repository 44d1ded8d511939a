#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace optflow {

/// Arc (from, to): `from` is a neighbor of `to`.
struct Arc {
  std::size_t from = 0;
  std::size_t to = 0;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// Immutable digraph on nodes 0..n-1 without self-loops. Arcs are kept sorted
/// and unique.
class DigraphSnapshot {
public:
  DigraphSnapshot() = default;
  DigraphSnapshot(std::size_t n, std::vector<Arc> arcs);

  std::size_t node_count() const noexcept { return n_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  bool has_arc(std::size_t from, std::size_t to) const;
  bool is_symmetric() const;

  /// Union of the arc sets; node counts must agree.
  DigraphSnapshot united(const DigraphSnapshot& other) const;

  friend bool operator==(const DigraphSnapshot&, const DigraphSnapshot&) = default;

private:
  std::size_t n_ = 0;
  std::vector<Arc> arcs_;
};

/// {j : (j, i) is an arc}, ascending.
std::vector<std::size_t> neighbors(const DigraphSnapshot& g, std::size_t i);
bool is_strongly_connected(const DigraphSnapshot& g);
/// Requires a symmetric arc set; throws InputError otherwise.
bool is_connected_bidirectional(const DigraphSnapshot& g);

struct TopologyPiece {
  double start = 0.0;
  DigraphSnapshot graph;
};

/// Piecewise-constant graph signal on [0, horizon], right-continuous at
/// switches. Construction enforces the dwell time between switches.
class SwitchingTopology {
public:
  SwitchingTopology(std::vector<TopologyPiece> pieces, double dwell, double horizon);

  const std::vector<TopologyPiece>& pieces() const noexcept { return pieces_; }
  double dwell() const noexcept { return dwell_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t node_count() const noexcept { return pieces_.front().graph.node_count(); }

  /// Index of the piece containing t.
  std::size_t piece_index(double t) const;
  /// End of piece k (next start, or the horizon for the last piece).
  double piece_end(std::size_t k) const;
  const DigraphSnapshot& snapshot_at(double t) const;
  /// Union of arcs over every piece meeting [t1, t2).
  DigraphSnapshot joint_graph(double t1, double t2) const;
  bool every_piece_symmetric() const;

private:
  std::vector<TopologyPiece> pieces_;
  double dwell_;
  double horizon_;
};

struct CertificationReport {
  std::string condition;  // "UJSC" or "IJC"
  bool pass = false;
  /// UJSC: the window length. IJC: unused.
  double window = 0.0;
  /// UJSC: number of window starts checked. IJC: partition break points.
  std::size_t windows_checked = 0;
  std::vector<double> partition;
  /// Start (and end) of the first failing window or partition interval.
  std::optional<std::pair<double, double>> first_failure;
  std::string note;
};

CertificationReport certify_ujsc(const SwitchingTopology& topo, double window);
CertificationReport certify_ijc(const SwitchingTopology& topo);

// Topology descriptions realized into concrete signals.

struct StaticTopology {
  DigraphSnapshot graph;
};

/// Graphs shown in turn, each for `piece_length`, repeating until the horizon.
struct PeriodicCycleTopology {
  std::vector<DigraphSnapshot> graphs;
  double piece_length = 1.0;
};

/// Interval k has length base * growth^k and is split evenly among the
/// listed graphs, shown in order. With a single graph each piece is one interval.
struct GrowingIntervalsTopology {
  std::vector<DigraphSnapshot> graphs;
  double base = 1.0;
  double growth = 2.0;
  std::size_t intervals = 1;
};

struct ScriptedTopology {
  std::vector<TopologyPiece> pieces;
};

/// Piece lengths uniform in [min_length, max_length]; each piece shows a
/// graph drawn from a palette pre-drawn with the given arc probability.
struct RandomDwellTopology {
  std::uint64_t seed = 0;
  double arc_probability = 0.5;
  std::size_t palette_size = 4;
  double min_length = 0.5;
  double max_length = 1.5;
  bool symmetric = false;
};

using TopologyKind = std::variant<StaticTopology, PeriodicCycleTopology, GrowingIntervalsTopology,
                                  ScriptedTopology, RandomDwellTopology>;

struct TopologySpec {
  TopologyKind kind;
  double dwell = 0.5;
  double horizon = 1.0;
};

SwitchingTopology realize(const TopologySpec& spec, std::size_t node_count);

}  // namespace optflow
