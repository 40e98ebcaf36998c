#include "tgfuse/sampling.hpp"

#include "tgfuse/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace tgfuse::sampling {

NegativeSet sample_negatives(std::span<const std::pair<std::int32_t, std::int32_t>> positives,
                             std::int32_t num_nodes, int k, std::uint64_t seed) {
  if (num_nodes < 2) throw std::invalid_argument("sample_negatives: need at least two nodes");
  if (k < 1) throw std::invalid_argument("sample_negatives: k must be >= 1");
  NegativeSet out;
  out.seed = seed;
  out.k = k;
  out.dst.reserve(positives.size() * static_cast<std::size_t>(k));
  Rng rng(seed);
  for (std::size_t p = 0; p < positives.size(); ++p) {
    for (int i = 0; i < k; ++i)
      out.dst.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes))));
  }
  return out;
}

namespace {

struct LocalIndex {
  std::unordered_map<std::int32_t, std::int32_t> to_local;
  std::vector<std::int64_t> to_global;

  // Returns the local id, assigning the next one on first sight.
  std::int32_t add(std::int32_t global, bool* inserted = nullptr) {
    auto [it, fresh] = to_local.try_emplace(global, static_cast<std::int32_t>(to_global.size()));
    if (fresh) to_global.push_back(global);
    if (inserted != nullptr) *inserted = fresh;
    return it->second;
  }
};

}  // namespace

std::vector<Batch> link_neighbor_batches(const TemporalGraph& g,
                                         std::span<const LabeledEdge> targets,
                                         std::int64_t batch_size, std::span<const int> fanout,
                                         std::uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("link_neighbor_batches: batch_size must be >= 1");
  if (targets.empty()) return {};

  std::vector<std::size_t> order(targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng order_rng = Rng::stream(seed, "batch-order");
  order_rng.shuffle(order);

  const PairIndex& adj = g.pairs();
  const std::int64_t num_batches =
      (static_cast<std::int64_t>(targets.size()) + batch_size - 1) / batch_size;

  std::vector<Batch> batches;
  batches.reserve(static_cast<std::size_t>(num_batches));

  for (std::int64_t b = 0; b < num_batches; ++b) {
    Rng expand_rng = Rng::stream(seed, "batch-expand", {static_cast<std::uint64_t>(b)});
    Batch batch;
    batch.seed_state = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(b + 1));
    batch.window_begin = g.window_begin();
    batch.window_count = g.window_count();
    batch.window_end = g.window_end();

    LocalIndex local;
    std::vector<std::int32_t> frontier;
    const std::size_t lo = static_cast<std::size_t>(b * batch_size);
    const std::size_t hi = std::min(targets.size(), static_cast<std::size_t>((b + 1) * batch_size));
    for (std::size_t t = lo; t < hi; ++t) {
      const LabeledEdge& e = targets[order[t]];
      bool fresh = false;
      const std::int32_t ls = local.add(e.src, &fresh);
      if (fresh) frontier.push_back(ls);
      const std::int32_t ld = local.add(e.dst, &fresh);
      if (fresh) frontier.push_back(ld);
      batch.edge_label_index.emplace_back(ls, ld);
      batch.edge_label.push_back(e.label);
    }

    std::vector<char> expanded;
    std::vector<std::int64_t> picked;
    for (std::size_t hop = 0; hop < fanout.size(); ++hop) {
      const int cap = fanout[hop];
      std::vector<std::int32_t> next_frontier;
      for (std::int32_t lid : frontier) {
        if (static_cast<std::size_t>(lid) >= expanded.size()) expanded.resize(local.to_global.size(), 0);
        if (expanded[lid]) continue;
        expanded[lid] = 1;
        if (cap == 0) continue;
        const std::int32_t gid = static_cast<std::int32_t>(local.to_global[lid]);
        const std::int64_t first = adj.row_ptr[gid], last = adj.row_ptr[gid + 1];
        const std::int64_t degree = last - first;
        picked.clear();
        if (cap < 0 || degree <= cap) {
          for (std::int64_t p = first; p < last; ++p) picked.push_back(p);
        } else {
          // partial Fisher-Yates over the pair range, then restored to CSR
          // order so accumulation order matches the full-graph forward
          std::vector<std::int64_t> pool(static_cast<std::size_t>(degree));
          for (std::int64_t i = 0; i < degree; ++i) pool[static_cast<std::size_t>(i)] = first + i;
          for (int i = 0; i < cap; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(expand_rng.below(static_cast<std::uint64_t>(degree - i)));
            std::swap(pool[i], pool[j]);
          }
          picked.assign(pool.begin(), pool.begin() + cap);
          std::sort(picked.begin(), picked.end());
        }
        for (std::int64_t p : picked) {
          bool fresh = false;
          const std::int32_t lj = local.add(adj.pair_dst[p], &fresh);
          if (fresh) {
            next_frontier.push_back(lj);
            expanded.resize(local.to_global.size(), 0);
          }
          for (std::int64_t ev = adj.event_ptr[p]; ev < adj.event_ptr[p + 1]; ++ev)
            batch.sub_edges.push_back({lid, lj, adj.event_tau[ev], adj.event_snap[ev]});
        }
      }
      frontier = std::move(next_frontier);
    }

    batch.local_to_global = std::move(local.to_global);
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<Snapshot> split_by_snapshot(const Batch& b) {
  if (b.local_to_global.empty()) return {};
  const std::int32_t n = static_cast<std::int32_t>(b.local_to_global.size());
  std::vector<std::vector<EdgeEvent>> buckets(static_cast<std::size_t>(b.window_count));
  for (const TemporalEdge& e : b.sub_edges) {
    const std::int32_t pos = e.snap - b.window_begin;
    if (pos < 0 || pos >= b.window_count)
      throw std::out_of_range("split_by_snapshot: edge snapshot outside the batch window");
    buckets[pos].push_back({e.src, e.dst, e.tau});
  }
  std::vector<Snapshot> out;
  out.reserve(buckets.size());
  for (std::int32_t pos = 0; pos < b.window_count; ++pos)
    out.push_back(Snapshot::build(std::move(buckets[pos]), n, b.window_begin + pos));
  return out;
}

}  // namespace tgfuse::sampling
