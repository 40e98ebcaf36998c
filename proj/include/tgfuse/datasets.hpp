#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tgfuse/graph.hpp"

namespace tgfuse::data {

// Timestamped edge events with ids densified to [0, num_nodes).
struct RawEventLog {
  std::int32_t num_nodes = 0;
  std::vector<EdgeEvent> events;              // sorted by timestamp (stable)
  std::vector<std::int64_t> original_ids;     // dense id -> original id
};

enum class EdgeFormat { Auto, SrcDstTime, SrcDstWeightTime };

// Whitespace- or comma-separated lines with >= 3 numeric columns; '#'/'%'
// comment lines skipped; self-loops dropped; the weight column of 4-column
// files is ignored. Malformed lines are reported with their line number.
RawEventLog parse_edge_list(const std::string& path, EdgeFormat format = EdgeFormat::Auto);

enum class BinMode { EqualDuration, EqualCount };
enum class TimeMode { Rescaled, Index };

// Bins events into num_steps snapshots. Edge taus are rescaled so one bin
// spans one time unit: bin k covers [k, k+1) (Rescaled keeps the within-bin
// position, Index pins every tau to k). Ties on an equal-duration bin
// boundary go to the earlier bin; equal-count keeps the stable time order.
std::vector<Snapshot> bin_snapshots(const RawEventLog& log, int num_steps, BinMode mode,
                                    TimeMode time_mode);

struct SplitSpec {
  int train = 0, val = 0, test = 0;
  int total() const { return train + val + test; }
};

struct SplitView {
  std::span<const Snapshot> train, val, test;
};

// Contiguous chronological partition; counts must sum to the snapshot count.
SplitView time_split(std::span<const Snapshot> snapshots, const SplitSpec& spec);

// Fixed per-positive negatives for evaluation, persisted so that every run
// ranks against identical candidates.
struct EvalNegatives {
  std::uint64_t seed = 0;
  int k = 0;
  std::int32_t num_nodes = 0;
  std::vector<std::int32_t> snap_index;              // evaluated snapshots, in order
  std::vector<std::vector<std::int32_t>> dst;        // per snapshot: k per positive

  const std::vector<std::int32_t>* find(std::int32_t snap) const;
};

EvalNegatives pregenerate_eval_negatives(std::span<const Snapshot> eval_snapshots,
                                         std::int32_t num_nodes, int k, std::uint64_t seed);

// Snapshot cache container:
//   magic "TGFSNAP1", u32 num_nodes, u32 num_snapshots,
//   per snapshot: u32 index, u64 edge count, edges as (u32 src, u32 dst, f64 tau).
void save_snapshots(std::span<const Snapshot> snapshots, std::int32_t num_nodes,
                    const std::string& path);
std::pair<std::vector<Snapshot>, std::int32_t> load_snapshots(const std::string& path);

// Negative-set container:
//   magic "TGFNEG01", u64 seed, u32 k, u32 num_nodes, u32 num_snapshots,
//   per snapshot: u32 snap index, u64 destination count, u32 destinations.
void save_negatives(const EvalNegatives& negs, const std::string& path);
EvalNegatives load_negatives(const std::string& path);

// Refire probability scale of the synthetic generator; tests recover the
// decay rate from generated streams against this constant.
inline constexpr double kSyntheticExcitation = 0.35;
inline constexpr double kSyntheticIntensityCap = 0.95;
// Fraction of spontaneous endpoint draws taken from the hot core (the first
// synthetic_core_size(n) node ids); the rest are uniform over all nodes.
inline constexpr double kSyntheticCoreMass = 0.85;

inline constexpr std::int32_t synthetic_core_size(std::int32_t num_nodes) {
  return num_nodes / 5 > 1 ? num_nodes / 5 : 1;
}

// Reproducible dynamic graph driven by pairwise self-excitation: each step
// draws base_pairs spontaneous ordered pairs uniformly, and every previously
// fired pair refires with probability
//   min(cap, kSyntheticExcitation * sum over past fires of exp(-delta_true * age)).
// Edge taus equal the step index. Future links are predictable from
// time-decayed history, which is what time-aware models must exploit.
std::vector<Snapshot> generate_synthetic_hawkes(std::int32_t num_nodes, int base_pairs,
                                                double delta_true, int num_steps,
                                                std::uint64_t seed);

}  // namespace tgfuse::data
