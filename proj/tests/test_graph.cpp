#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

using namespace tgfuse;
using testutil::random_graph;

namespace {

// Canonical multiset view for comparisons.
std::multiset<std::tuple<int, int, double, int>> edge_multiset(const TemporalGraph& g) {
  std::multiset<std::tuple<int, int, double, int>> out;
  for (const TemporalEdge& e : g.edges()) out.insert({e.src, e.dst, e.tau, e.snap});
  return out;
}

}  // namespace

TEST_CASE("build_snapshot stores edges in order, duplicates preserved") {
  Snapshot s = Snapshot::build({{0, 1, 5.0}}, 2, 0);
  CHECK(s.num_edges() == 1);
  CHECK(s.edges()[0].src == 0);
  CHECK(s.edges()[0].dst == 1);

  Snapshot empty = Snapshot::build({}, 3, 1);
  CHECK(empty.num_edges() == 0);
  CHECK(empty.num_nodes() == 3);
}

TEST_CASE("build_snapshot rejects out-of-range node ids naming the edge") {
  try {
    Snapshot::build({{0, 5, 1.0}}, 2, 0);
    FAIL("expected out_of_range");
  } catch (const std::out_of_range& e) {
    CHECK(std::string(e.what()).find("node 5 out of range") != std::string::npos);
  }
  CHECK_THROWS_AS(Snapshot::build({{0, 1, 0.0}}, 0, 0), std::invalid_argument);
}

TEST_CASE("fuse conserves edge counts") {
  Snapshot a = Snapshot::build({{0, 1, 0.1}, {1, 2, 0.2}, {2, 0, 0.3}}, 3, 0);
  Snapshot b = Snapshot::build({{0, 2, 1.1}, {1, 0, 1.2}}, 3, 1);
  std::vector<Snapshot> snaps;
  snaps.push_back(a);
  snaps.push_back(b);
  TemporalGraph g = TemporalGraph::fuse(snaps, 2.0, false);
  CHECK(g.num_edges() == 5);
  TemporalGraph gs = TemporalGraph::fuse(snaps, 2.0, true);
  CHECK(gs.num_edges() == 10);
}

TEST_CASE("fuse keeps parallel edges under one pair group") {
  Snapshot a = Snapshot::build({{0, 1, 1.0}, {0, 1, 2.0}}, 2, 0);
  std::vector<Snapshot> snaps{a};
  TemporalGraph g = TemporalGraph::fuse(snaps, 3.0, false);
  CHECK(g.num_edges() == 2);
  CHECK(g.pairs().num_pairs() == 1);
  auto groups = g.temporal_neighbors(0);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].dst == 1);
  CHECK(groups[0].taus.size() == 2);
}

TEST_CASE("fuse rejects future leakage and bad index order") {
  Snapshot a = Snapshot::build({{0, 1, 5.0}}, 2, 0);
  std::vector<Snapshot> snaps{a};
  CHECK_THROWS_AS(TemporalGraph::fuse(snaps, 5.0, false), std::invalid_argument);
  CHECK_THROWS_AS(TemporalGraph::fuse({}, 5.0, false), std::invalid_argument);

  Snapshot b = Snapshot::build({{0, 1, 0.5}}, 2, 0);  // duplicate index 0
  std::vector<Snapshot> dup{a, b};
  CHECK_THROWS_AS(TemporalGraph::fuse(dup, 6.0, false), std::invalid_argument);
}

TEST_CASE("symmetrize adds reverse twins with identical tau and snap") {
  Snapshot a = Snapshot::build({{0, 1, 0.25}}, 2, 0);
  std::vector<Snapshot> snaps{a};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);
  auto edges = edge_multiset(g);
  CHECK(edges.count({0, 1, 0.25, 0}) == 1);
  CHECK(edges.count({1, 0, 0.25, 0}) == 1);
}

TEST_CASE("fusion is insensitive to edge order within snapshots") {
  Rng rng(21);
  std::vector<EdgeEvent> edges;
  for (int i = 0; i < 40; ++i) {
    const std::int32_t u = static_cast<std::int32_t>(rng.below(8));
    std::int32_t v = static_cast<std::int32_t>(rng.below(7));
    if (v >= u) ++v;
    edges.push_back({u, v, 0.9 * rng.uniform01()});
  }
  std::vector<EdgeEvent> shuffled = edges;
  rng.shuffle(shuffled);
  std::vector<Snapshot> s1{Snapshot::build(edges, 8, 0)};
  std::vector<Snapshot> s2{Snapshot::build(shuffled, 8, 0)};
  CHECK(edge_multiset(TemporalGraph::fuse(s1, 1.0, true)) ==
        edge_multiset(TemporalGraph::fuse(s2, 1.0, true)));
}

TEST_CASE("binary degrees collapse parallel edges") {
  std::vector<Snapshot> snaps{Snapshot::build({{0, 1, 0.1}, {0, 1, 0.2}}, 2, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, false);
  CHECK(g.binary_degrees()[0] == 1);
  CHECK(g.binary_degrees()[1] == 0);
}

TEST_CASE("binary degrees of a symmetrized triangle") {
  std::vector<Snapshot> snaps{Snapshot::build({{0, 1, 0.1}, {0, 2, 0.2}, {1, 2, 0.3}}, 3, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);
  DegreeVector deg = g.binary_degrees();
  CHECK(deg[0] == 2);
  CHECK(deg[1] == 2);
  CHECK(deg[2] == 2);
}

TEST_CASE("binary degrees match a hash-set oracle and ignore duplication") {
  Rng rng(33);
  TemporalGraph g = random_graph(rng, 50, 400, 4);
  DegreeVector deg = g.binary_degrees();
  std::map<int, std::set<int>> neighbor_sets;
  for (const TemporalEdge& e : g.edges()) neighbor_sets[e.src].insert(e.dst);
  for (std::int32_t i = 0; i < g.num_nodes(); ++i)
    CHECK(deg[i] == static_cast<std::int32_t>(neighbor_sets[i].size()));

  // duplicating an existing temporal edge leaves degrees unchanged
  std::vector<TemporalEdge> edges = g.edges();
  edges.push_back(edges.front());
  TemporalGraph dup = TemporalGraph::from_edges(g.num_nodes(), edges, g.window_end(),
                                                g.window_begin(), g.window_count());
  for (std::int32_t i = 0; i < g.num_nodes(); ++i) CHECK(dup.binary_degrees()[i] == deg[i]);
}

TEST_CASE("temporal_neighbors groups parallel edges by unique neighbor") {
  std::vector<Snapshot> snaps{
      Snapshot::build({{0, 1, 1.0}, {0, 1, 2.0}, {0, 2, 2.0}}, 3, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 3.0, false);
  auto groups = g.temporal_neighbors(0);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].dst == 1);
  REQUIRE(groups[0].taus.size() == 2);
  CHECK(groups[0].taus[0] == 1.0);
  CHECK(groups[0].taus[1] == 2.0);
  CHECK(groups[1].dst == 2);
  CHECK(groups[1].taus.size() == 1);

  CHECK(g.temporal_neighbors(1).empty());
  CHECK_THROWS_AS(g.temporal_neighbors(5), std::out_of_range);
  CHECK_THROWS_AS(g.temporal_neighbors(-1), std::out_of_range);
}

TEST_CASE("temporal_neighbors covers the edge list exactly") {
  Rng rng(44);
  TemporalGraph g = random_graph(rng, 30, 250, 3);
  std::multiset<std::tuple<int, int, double>> from_groups, from_list;
  for (std::int32_t i = 0; i < g.num_nodes(); ++i) {
    for (const auto& grp : g.temporal_neighbors(i)) {
      for (std::size_t k = 0; k < grp.taus.size(); ++k)
        from_groups.insert({i, grp.dst, grp.taus[k]});
    }
  }
  for (const TemporalEdge& e : g.edges()) from_list.insert({e.src, e.dst, e.tau});
  CHECK(from_groups == from_list);

  // and equals a linear-scan filter per node
  for (std::int32_t i = 0; i < g.num_nodes(); i += 7) {
    std::multiset<std::pair<int, double>> scan, grouped;
    for (const TemporalEdge& e : g.edges()) {
      if (e.src == i) scan.insert({e.dst, e.tau});
    }
    for (const auto& grp : g.temporal_neighbors(i)) {
      for (double tau : grp.taus) grouped.insert({grp.dst, tau});
    }
    CHECK(scan == grouped);
  }
}

TEST_CASE("deduplicated collapses pairs and can add self-loops") {
  std::vector<Snapshot> snaps{
      Snapshot::build({{0, 1, 0.1}, {0, 1, 0.7}, {1, 2, 0.4}}, 3, 0)};
  TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, false);
  TemporalGraph d = g.deduplicated(false);
  CHECK(d.num_edges() == 2);
  TemporalGraph dl = g.deduplicated(true);
  CHECK(dl.num_edges() == 2 + 3);
  CHECK(dl.binary_degrees()[2] == 1);  // isolated source gains only its loop
}
