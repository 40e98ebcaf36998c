#pragma once

#include "tgfuse/datasets.hpp"
#include "tgfuse/train.hpp"

namespace testutil {

// Small synthetic-fixture bundle for trainer tests.
inline tgfuse::train::DatasetBundle make_bundle(std::int32_t num_nodes, int base_pairs,
                                                double delta, int steps,
                                                tgfuse::data::SplitSpec split, int k_eval,
                                                std::uint64_t seed) {
  tgfuse::train::DatasetBundle b;
  b.snapshots = tgfuse::data::generate_synthetic_hawkes(num_nodes, base_pairs, delta, steps, seed);
  b.num_nodes = num_nodes;
  b.split = split;
  b.eval_negs = tgfuse::data::pregenerate_eval_negatives(
      std::span(b.snapshots.data() + split.train,
                static_cast<std::size_t>(split.val + split.test)),
      num_nodes, k_eval, seed + 1);
  return b;
}

}  // namespace testutil
