#include <doctest.h>

#include <random>
#include <vector>

#include "optflow/errors.hpp"
#include "optflow/random.hpp"
#include "optflow/topology.hpp"

using namespace optflow;

namespace {

DigraphSnapshot ring(std::size_t n) {
  std::vector<Arc> arcs;
  for (std::size_t k = 0; k < n; ++k) arcs.push_back({k, (k + 1) % n});
  return DigraphSnapshot(n, arcs);
}

DigraphSnapshot single_arc(std::size_t n, std::size_t from, std::size_t to) { return DigraphSnapshot(n, {{from, to}}); }

DigraphSnapshot both_ways(std::size_t n, std::size_t a, std::size_t b) { return DigraphSnapshot(n, {{a, b}, {b, a}}); }

// Reachability by transitive closure.
bool closure_strongly_connected(const DigraphSnapshot& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& a : g.arcs()) r[a.from][a.to] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!r[i][j]) return false;
  return true;
}

}  // namespace

TEST_CASE("digraph construction") {
  const DigraphSnapshot g(3, {{1, 0}, {0, 2}, {1, 0}});
  CHECK(g.arcs().size() == 2);
  CHECK(g.has_arc(1, 0));
  CHECK_FALSE(g.has_arc(0, 1));
  CHECK(neighbors(g, 0) == std::vector<std::size_t>{1});
  CHECK(neighbors(g, 1).empty());
  CHECK_THROWS_AS(DigraphSnapshot(2, {{0, 0}}), InputError);
  CHECK_THROWS_AS(DigraphSnapshot(2, {{0, 2}}), InputError);
  CHECK_THROWS_AS(g.united(ring(4)), InputError);
  CHECK(both_ways(3, 0, 2).is_symmetric());
  CHECK_FALSE(g.is_symmetric());
}

TEST_CASE("connectivity examples") {
  CHECK(is_strongly_connected(ring(5)));
  CHECK_FALSE(is_strongly_connected(single_arc(2, 0, 1)));
  CHECK(is_strongly_connected(DigraphSnapshot(1, {})));
  CHECK_FALSE(is_strongly_connected(DigraphSnapshot(2, {})));
  CHECK(is_connected_bidirectional(both_ways(2, 0, 1)));
  CHECK_FALSE(is_connected_bidirectional(both_ways(3, 0, 1)));
  CHECK_THROWS_AS(is_connected_bidirectional(ring(3)), InputError);
}

TEST_CASE("strong connectivity matches transitive closure") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + uniform_index(7, rng);
    const double p = uniform(rng, 0.05, 0.6);
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && uniform01(rng) < p) arcs.push_back({i, j});
    const DigraphSnapshot g(n, arcs);
    CHECK(is_strongly_connected(g) == closure_strongly_connected(g));
  }
}

TEST_CASE("switching signal basics") {
  const SwitchingTopology topo({{0.0, single_arc(2, 0, 1)}, {1.0, single_arc(2, 1, 0)}}, 0.5, 3.0);
  CHECK(topo.piece_index(0.0) == 0);
  CHECK(topo.piece_index(0.999) == 0);
  CHECK(topo.piece_index(1.0) == 1);  // right-continuous
  CHECK(topo.piece_index(3.0) == 1);
  CHECK(topo.piece_end(0) == 1.0);
  CHECK(topo.piece_end(1) == 3.0);
  CHECK_THROWS_AS(topo.piece_index(3.5), InputError);
  CHECK(topo.joint_graph(0.0, 1.0) == single_arc(2, 0, 1));
  CHECK(topo.joint_graph(0.5, 1.5).arcs().size() == 2);
  CHECK_THROWS_AS(topo.joint_graph(1.0, 1.0), InputError);
}

TEST_CASE("switching signal rejects bad pieces") {
  const auto g = ring(3);
  CHECK_THROWS_AS(SwitchingTopology({{0.0, g}, {0.3, g}}, 0.5, 2.0), InputError);  // dwell
  CHECK_THROWS_AS(SwitchingTopology({{0.1, g}}, 0.5, 2.0), InputError);
  CHECK_THROWS_AS(SwitchingTopology({{0.0, g}, {2.0, g}}, 0.5, 2.0), InputError);
  CHECK_THROWS_AS(SwitchingTopology({{0.0, g}, {1.0, ring(4)}}, 0.5, 2.0), InputError);
  CHECK_THROWS_AS(SwitchingTopology({}, 0.5, 2.0), InputError);
  CHECK_THROWS_AS(SwitchingTopology({{0.0, g}}, 0.0, 2.0), InputError);
  CHECK_NOTHROW(SwitchingTopology({{0.0, g}, {0.5, g}}, 0.5, 2.0));  // exactly the dwell
}

TEST_CASE("UJSC certification") {
  // arcs 0->1 and 1->0 alternate each unit of time
  const SwitchingTopology alt({{0.0, single_arc(2, 0, 1)},
                               {1.0, single_arc(2, 1, 0)},
                               {2.0, single_arc(2, 0, 1)},
                               {3.0, single_arc(2, 1, 0)}},
                              0.5, 4.0);
  CHECK_FALSE(certify_ujsc(alt, 1.0).pass);
  const auto r = certify_ujsc(alt, 1.5);
  CHECK(r.pass);
  CHECK(r.windows_checked > 0);
  CHECK_FALSE(r.first_failure);
  CHECK_THROWS_AS(certify_ujsc(alt, 0.0), InputError);
  CHECK_THROWS_AS(certify_ujsc(alt, 5.0), InputError);

  // a gap of missing arcs in the middle
  const SwitchingTopology gap({{0.0, ring(3)}, {1.0, DigraphSnapshot(3, {})}, {4.0, ring(3)}}, 0.5, 6.0);
  const auto fail = certify_ujsc(gap, 2.0);
  CHECK_FALSE(fail.pass);
  REQUIRE(fail.first_failure);
  CHECK(fail.first_failure->first == doctest::Approx(1.0));
  CHECK(certify_ujsc(gap, 3.5).pass);
}

TEST_CASE("IJC certification") {
  // stars that take longer and longer to complete
  std::vector<TopologyPiece> pieces;
  double t = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double len = std::pow(2.0, k);
    pieces.push_back({t, both_ways(3, 0, 1)});
    pieces.push_back({t + len / 2, both_ways(3, 0, 2)});
    t += len;
  }
  const SwitchingTopology topo(pieces, 0.5, t);
  const auto r = certify_ijc(topo);
  CHECK(r.pass);
  CHECK(r.windows_checked == 4);
  CHECK(r.partition == std::vector<double>{0.0, 1.0, 3.0, 7.0, 15.0});
  // the later intervals are longer than any fixed window of length 2
  CHECK_FALSE(certify_ujsc(topo, 2.0).pass);

  const SwitchingTopology never({{0.0, both_ways(3, 0, 1)}}, 0.5, 5.0);
  CHECK_FALSE(certify_ijc(never).pass);
  const SwitchingTopology directed({{0.0, ring(3)}}, 0.5, 5.0);
  CHECK_THROWS_AS(certify_ijc(directed), InputError);
}

TEST_CASE("realized topologies") {
  const std::vector<DigraphSnapshot> cyc = {single_arc(3, 0, 1), single_arc(3, 1, 2), single_arc(3, 2, 0)};
  const auto periodic = realize(TopologySpec{PeriodicCycleTopology{cyc, 1.0}, 0.5, 10.0}, 3);
  CHECK(periodic.pieces().size() == 10);
  CHECK(periodic.snapshot_at(4.5) == cyc[1]);
  CHECK(certify_ujsc(periodic, 3.0).pass);
  CHECK_FALSE(certify_ujsc(periodic, 2.0).pass);

  const auto growing =
      realize(TopologySpec{GrowingIntervalsTopology{{both_ways(3, 0, 1), both_ways(3, 0, 2)}, 1.0, 2.0, 3}, 0.5, 7.0}, 3);
  CHECK(growing.pieces().size() == 6);
  CHECK(growing.pieces()[3].start == doctest::Approx(2.0));
  CHECK(certify_ijc(growing).windows_checked == 3);

  CHECK_THROWS_AS(realize(TopologySpec{StaticTopology{ring(3)}, 0.5, 1.0}, 4), InputError);
  CHECK_THROWS_AS(realize(TopologySpec{PeriodicCycleTopology{cyc, 0.2}, 0.5, 10.0}, 3), InputError);
}

TEST_CASE("random dwell topology is deterministic") {
  const TopologySpec spec{RandomDwellTopology{42, 0.4, 3, 0.5, 2.0, true}, 0.5, 30.0};
  const auto a = realize(spec, 5);
  const auto b = realize(spec, 5);
  REQUIRE(a.pieces().size() == b.pieces().size());
  for (std::size_t k = 0; k < a.pieces().size(); ++k) {
    CHECK(a.pieces()[k].start == b.pieces()[k].start);
    CHECK(a.pieces()[k].graph == b.pieces()[k].graph);
  }
  CHECK(a.every_piece_symmetric());
  for (std::size_t k = 1; k < a.pieces().size(); ++k) {
    CHECK(a.pieces()[k].start - a.pieces()[k - 1].start >= 0.5 - 1e-12);
  }
  const auto c = realize(TopologySpec{RandomDwellTopology{43, 0.4, 3, 0.5, 2.0, true}, 0.5, 30.0}, 5);
  CHECK(c.pieces().front().start == 0.0);
  bool differs = c.pieces().size() != a.pieces().size();
  for (std::size_t k = 0; !differs && k < a.pieces().size(); ++k) differs = a.pieces()[k].start != c.pieces()[k].start;
  CHECK(differs);
}
