#include "tgfuse/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tgfuse {

namespace {

// Canonical order: grouped by (src, dst) with dst ascending per source,
// events within a group ordered by (snap, tau). Construction sorts once and
// then never mutates, so readers never need locks.
PairIndex build_index(std::int32_t num_nodes, std::vector<TemporalEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const TemporalEdge& a, const TemporalEdge& b) {
    if (a.src != b.src) return a.src < b.src;
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.snap != b.snap) return a.snap < b.snap;
    return a.tau < b.tau;
  });

  PairIndex idx;
  idx.num_nodes = num_nodes;
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
  idx.event_tau.reserve(m);
  idx.event_snap.reserve(m);

  for (std::int64_t e = 0; e < m; ++e) {
    const TemporalEdge& te = edges[e];
    if (idx.pair_src.empty() || idx.pair_src.back() != te.src || idx.pair_dst.back() != te.dst) {
      idx.pair_src.push_back(te.src);
      idx.pair_dst.push_back(te.dst);
      idx.event_ptr.push_back(static_cast<std::int64_t>(idx.event_tau.size()));
    }
    idx.event_tau.push_back(te.tau);
    idx.event_snap.push_back(te.snap);
  }
  idx.event_ptr.push_back(static_cast<std::int64_t>(idx.event_tau.size()));
  if (idx.pair_src.empty()) idx.event_ptr = {0};

  const std::int64_t pairs = idx.num_pairs();
  idx.row_ptr.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (std::int64_t p = 0; p < pairs; ++p) idx.row_ptr[idx.pair_src[p] + 1]++;
  for (std::int32_t i = 0; i < num_nodes; ++i) idx.row_ptr[i + 1] += idx.row_ptr[i];

  // Transpose: pairs grouped by destination, ordered by source (pair ids are
  // already sorted by (src, dst), so a stable counting pass suffices).
  idx.t_row_ptr.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (std::int64_t p = 0; p < pairs; ++p) idx.t_row_ptr[idx.pair_dst[p] + 1]++;
  for (std::int32_t i = 0; i < num_nodes; ++i) idx.t_row_ptr[i + 1] += idx.t_row_ptr[i];
  idx.t_pair.assign(static_cast<std::size_t>(pairs), 0);
  std::vector<std::int64_t> cursor(idx.t_row_ptr.begin(), idx.t_row_ptr.end() - 1);
  for (std::int64_t p = 0; p < pairs; ++p) idx.t_pair[cursor[idx.pair_dst[p]]++] = p;

  return idx;
}

}  // namespace

Snapshot Snapshot::build(std::vector<EdgeEvent> edges, std::int32_t num_nodes,
                         std::int32_t index) {
  if (num_nodes <= 0) throw std::invalid_argument("build_snapshot: num_nodes must be positive");
  for (const EdgeEvent& e : edges) {
    if (e.src < 0 || e.src >= num_nodes)
      throw std::out_of_range("build_snapshot: node " + std::to_string(e.src) +
                              " out of range in edge (" + std::to_string(e.src) + ", " +
                              std::to_string(e.dst) + ")");
    if (e.dst < 0 || e.dst >= num_nodes)
      throw std::out_of_range("build_snapshot: node " + std::to_string(e.dst) +
                              " out of range in edge (" + std::to_string(e.src) + ", " +
                              std::to_string(e.dst) + ")");
  }
  Snapshot s;
  s.index_ = index;
  s.num_nodes_ = num_nodes;
  s.edges_ = std::move(edges);
  return s;
}

TemporalGraph TemporalGraph::fuse(std::span<const Snapshot> snapshots, double window_end,
                                  bool symmetrize) {
  if (snapshots.empty()) throw std::invalid_argument("fuse: empty snapshot list");
  const std::int32_t num_nodes = snapshots.front().num_nodes();
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    if (snapshots[k].num_nodes() != num_nodes)
      throw std::invalid_argument("fuse: snapshots disagree on num_nodes");
    if (k > 0 && snapshots[k].index() <= snapshots[k - 1].index())
      throw std::invalid_argument("fuse: snapshot indices must be strictly increasing");
  }

  std::vector<TemporalEdge> edges;
  std::int64_t total = 0;
  for (const Snapshot& s : snapshots) total += s.num_edges();
  edges.reserve(static_cast<std::size_t>(symmetrize ? 2 * total : total));

  for (const Snapshot& s : snapshots) {
    for (const EdgeEvent& e : s.edges()) {
      if (e.tau >= window_end)
        throw std::invalid_argument("fuse: edge at tau=" + std::to_string(e.tau) +
                                    " does not precede window_end=" + std::to_string(window_end) +
                                    " (future leakage)");
      edges.push_back({e.src, e.dst, e.tau, s.index()});
      if (symmetrize) edges.push_back({e.dst, e.src, e.tau, s.index()});
    }
  }

  TemporalGraph g;
  g.window_end_ = window_end;
  g.window_begin_ = snapshots.front().index();
  g.window_count_ = snapshots.back().index() - snapshots.front().index() + 1;
  g.index_ = build_index(num_nodes, edges);
  return g;
}

TemporalGraph TemporalGraph::from_edges(std::int32_t num_nodes, std::vector<TemporalEdge> edges,
                                        double window_end, std::int32_t window_begin,
                                        std::int32_t window_count) {
  if (num_nodes <= 0) throw std::invalid_argument("from_edges: num_nodes must be positive");
  for (const TemporalEdge& e : edges) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
      throw std::out_of_range("from_edges: node id out of range");
  }
  TemporalGraph g;
  g.window_end_ = window_end;
  g.window_begin_ = window_begin;
  g.window_count_ = window_count;
  g.index_ = build_index(num_nodes, edges);
  return g;
}

std::vector<TemporalEdge> TemporalGraph::edges() const {
  std::vector<TemporalEdge> out;
  out.reserve(static_cast<std::size_t>(num_edges()));
  for (std::int64_t p = 0; p < index_.num_pairs(); ++p) {
    for (std::int64_t ev = index_.event_ptr[p]; ev < index_.event_ptr[p + 1]; ++ev)
      out.push_back({index_.pair_src[p], index_.pair_dst[p], index_.event_tau[ev],
                     index_.event_snap[ev]});
  }
  return out;
}

std::vector<TemporalGraph::NeighborGroup> TemporalGraph::temporal_neighbors(
    std::int32_t i) const {
  if (i < 0 || i >= num_nodes())
    throw std::out_of_range("temporal_neighbors: node " + std::to_string(i) + " out of range");
  std::vector<NeighborGroup> groups;
  groups.reserve(static_cast<std::size_t>(index_.row_ptr[i + 1] - index_.row_ptr[i]));
  for (std::int64_t p = index_.row_ptr[i]; p < index_.row_ptr[i + 1]; ++p) {
    const std::int64_t lo = index_.event_ptr[p], hi = index_.event_ptr[p + 1];
    groups.push_back({index_.pair_dst[p],
                      {index_.event_tau.data() + lo, static_cast<std::size_t>(hi - lo)},
                      {index_.event_snap.data() + lo, static_cast<std::size_t>(hi - lo)}});
  }
  return groups;
}

DegreeVector TemporalGraph::binary_degrees() const {
  DegreeVector deg;
  deg.values.assign(static_cast<std::size_t>(num_nodes()), 0);
  for (std::int32_t i = 0; i < num_nodes(); ++i)
    deg.values[i] = static_cast<std::int32_t>(index_.row_ptr[i + 1] - index_.row_ptr[i]);
  return deg;
}

TemporalGraph TemporalGraph::deduplicated(bool add_self_loops) const {
  std::vector<TemporalEdge> edges;
  edges.reserve(static_cast<std::size_t>(index_.num_pairs() + (add_self_loops ? num_nodes() : 0)));
  for (std::int64_t p = 0; p < index_.num_pairs(); ++p) {
    const std::int64_t first = index_.event_ptr[p];
    edges.push_back({index_.pair_src[p], index_.pair_dst[p], index_.event_tau[first],
                     index_.event_snap[first]});
  }
  if (add_self_loops) {
    for (std::int32_t i = 0; i < num_nodes(); ++i)
      edges.push_back({i, i, static_cast<double>(window_begin_), window_begin_});
  }
  return from_edges(num_nodes(), std::move(edges), window_end_, window_begin_, window_count_);
}

}  // namespace tgfuse
