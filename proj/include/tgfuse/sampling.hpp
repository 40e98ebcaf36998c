#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tgfuse/graph.hpp"

namespace tgfuse::sampling {

struct LabeledEdge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  double label = 0.0;
};

// k corrupted pairs per positive: same source, uniformly random destination
// over [0, num_nodes). Destinations are not filtered against true edges.
struct NegativeSet {
  std::uint64_t seed = 0;
  int k = 0;
  std::vector<std::int32_t> dst;  // k entries per positive, row-major

  std::span<const std::int32_t> for_positive(std::size_t p) const {
    return {dst.data() + p * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
};

NegativeSet sample_negatives(std::span<const std::pair<std::int32_t, std::int32_t>> positives,
                             std::int32_t num_nodes, int k, std::uint64_t seed);

// Sampled temporal subgraph around a slice of target edges.
struct Batch {
  std::vector<std::int64_t> local_to_global;  // local node id -> global
  std::vector<TemporalEdge> sub_edges;        // local ids; subset of the fused edges
  std::vector<std::pair<std::int32_t, std::int32_t>> edge_label_index;  // local ids
  std::vector<double> edge_label;
  std::uint64_t seed_state = 0;
  std::int32_t window_begin = 0;
  std::int32_t window_count = 0;
  double window_end = 0.0;
};

// Partitions the labeled targets (shuffled under seed) into batches of
// batch_size and expands each for fanout.size() hops: per hop, every frontier
// node contributes up to fanout[h] unique neighbors (all of them when the cap
// is negative), and every parallel temporal edge of a chosen neighbor enters
// the batch. fanout 0 keeps endpoint nodes only. With unlimited fanout the
// subgraph contains every edge sourced within (hops-1) steps of the targets,
// which makes an L-layer forward on the batch exact for the target nodes.
std::vector<Batch> link_neighbor_batches(const TemporalGraph& g,
                                         std::span<const LabeledEdge> targets,
                                         std::int64_t batch_size, std::span<const int> fanout,
                                         std::uint64_t seed);

// Partitions sub_edges back into per-snapshot graphs over the batch's local
// node space; positions without edges yield empty snapshots so the window
// stays positionally aligned.
std::vector<Snapshot> split_by_snapshot(const Batch& b);

}  // namespace tgfuse::sampling
