#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tgfuse {

// One timestamped directed edge event inside a snapshot.
struct EdgeEvent {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  double tau = 0.0;
};

// Edge event tagged with the index of the snapshot it came from.
struct TemporalEdge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  double tau = 0.0;
  std::int32_t snap = 0;
};

// One time-bin of a dynamic graph. Immutable after construction.
class Snapshot {
 public:
  // Validates node ids against num_nodes; preserves edge order and duplicates.
  static Snapshot build(std::vector<EdgeEvent> edges, std::int32_t num_nodes,
                        std::int32_t index);

  std::int32_t index() const { return index_; }
  std::int32_t num_nodes() const { return num_nodes_; }
  std::span<const EdgeEvent> edges() const { return edges_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }

 private:
  Snapshot() = default;
  std::int32_t index_ = 0;
  std::int32_t num_nodes_ = 0;
  std::vector<EdgeEvent> edges_;
};

// Adjacency index of a temporal multigraph. Parallel temporal edges between
// the same ordered pair (i, j) are grouped into one "pair"; pairs are grouped
// by source node in CSR fashion, with a transpose index grouped by
// destination for reverse traversal. All arrays are immutable after build,
// so concurrent reads need no synchronization.
struct PairIndex {
  std::int32_t num_nodes = 0;
  std::vector<std::int64_t> row_ptr;    // num_nodes+1; pair range per source
  std::vector<std::int32_t> pair_src;   // per pair
  std::vector<std::int32_t> pair_dst;   // per pair, ascending within a row
  std::vector<std::int64_t> event_ptr;  // num_pairs+1; event range per pair
  std::vector<double> event_tau;
  std::vector<std::int32_t> event_snap;
  std::vector<std::int64_t> t_row_ptr;  // num_nodes+1; transpose, grouped by dst
  std::vector<std::int64_t> t_pair;     // pair ids ordered by (dst, src)

  std::int64_t num_pairs() const { return static_cast<std::int64_t>(pair_src.size()); }
  std::int64_t num_events() const { return static_cast<std::int64_t>(event_tau.size()); }
};

// Per-node count of distinct neighbors (from the binary adjacency, so
// parallel temporal edges collapse to one).
struct DegreeVector {
  std::vector<std::int32_t> values;
  std::int32_t operator[](std::int32_t i) const { return values[i]; }
  std::int32_t size() const { return static_cast<std::int32_t>(values.size()); }
};

// Fused multigraph over a window of snapshots. Edges carry their timestamp
// and originating snapshot index; parallel edges are retained. Immutable.
class TemporalGraph {
 public:
  // Merges the given snapshots. Requires a non-empty list with strictly
  // increasing indices, equal num_nodes, and every tau < window_end.
  // With symmetrize, every edge gains a reverse twin with identical tau/snap.
  static TemporalGraph fuse(std::span<const Snapshot> snapshots, double window_end,
                            bool symmetrize);

  // Direct construction from an edge list (used for sampled subgraphs and
  // tests). No tau-vs-window_end validation here; fuse() is the gatekeeper.
  static TemporalGraph from_edges(std::int32_t num_nodes, std::vector<TemporalEdge> edges,
                                  double window_end, std::int32_t window_begin,
                                  std::int32_t window_count);

  std::int32_t num_nodes() const { return index_.num_nodes; }
  std::int64_t num_edges() const { return index_.num_events(); }
  double window_end() const { return window_end_; }
  std::int32_t window_begin() const { return window_begin_; }
  std::int32_t window_count() const { return window_count_; }
  const PairIndex& pairs() const { return index_; }

  // Edge list in canonical order: grouped by (src, dst), events within a
  // group ordered by (snap, tau). Exact multiset union of the inputs.
  std::vector<TemporalEdge> edges() const;

  // Unique-neighbor groups of node i: one (dst, taus, snaps) triple per pair.
  struct NeighborGroup {
    std::int32_t dst;
    std::span<const double> taus;
    std::span<const std::int32_t> snaps;
  };
  std::vector<NeighborGroup> temporal_neighbors(std::int32_t i) const;

  DegreeVector binary_degrees() const;

  // Collapses parallel edges to one pseudo-event per pair and discards
  // timestamps (keeps the earliest). Optionally inserts a self-loop pair per
  // node, for the plain-GCN aggregation rule.
  TemporalGraph deduplicated(bool add_self_loops) const;

 private:
  TemporalGraph() = default;
  PairIndex index_;
  double window_end_ = 0.0;
  std::int32_t window_begin_ = 0;
  std::int32_t window_count_ = 0;
};

}  // namespace tgfuse
