#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tgfuse/graph.hpp"
#include "tgfuse/rng.hpp"

namespace tgfuse::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_err = 0.0;
  std::string detail;  // failing seed / instance on failure
  double seconds = 0.0;
};

// Random symmetrized temporal multigraph for property checks: up to max_nodes
// nodes and max_edges temporal edges spread over a few snapshots.
TemporalGraph random_temporal_graph(Rng& rng, int max_nodes, int max_edges);

// tr(F^T L F) against the edge-wise decayed smoothness sum, both sides
// computed independently. fault_injection shifts the edge-wise route and is
// a test hook proving that violations are caught and attributed to a seed.
CheckResult check_decay_identity(int instances, std::uint64_t base_seed,
                           double fault_injection = 0.0);

// End-to-end d(loss)/d(theta) for the two Hawkes models against central
// finite differences, all parameters included.
CheckResult check_gradients(int instances, std::uint64_t base_seed);

// Hawkes-GCN with decay 0, zero root weight and collapsed parallel edges
// against plain GCN without self-loops.
CheckResult check_delta0_collapse(int instances, std::uint64_t base_seed);

// Unlimited-fanout single-batch forward and short training trajectory
// against full-graph training.
CheckResult check_batch_equivalence(std::uint64_t seed);

std::vector<CheckResult> run_all();

// Prints one line per check; returns true when everything passed.
bool print_report(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace tgfuse::verify
