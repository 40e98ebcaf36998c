#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace tgfuse::bench {

struct BenchConfig {
  // Window-scaling scenario: uniform random edge stream.
  std::int32_t stream_nodes = 20000;
  std::int64_t stream_edges_per_snapshot = 200000;
  std::vector<int> windows{1, 5, 10, 20};
  // Memory scenario: full-batch vs mini-batch on one target window.
  std::int32_t mem_nodes = 100000;
  std::int64_t mem_edges_per_snapshot = 18000;
  int mem_window = 9;
  int mem_hidden = 32;
  std::int64_t mem_batch_size = 512;
  std::int64_t mem_positive_cap = 8000;
  // Kernel comparison sizes.
  std::int64_t kernel_rows = 200000;
  int kernel_dim = 64;
  std::uint64_t seed = 17;
};

struct Row {
  std::string name;
  std::vector<std::pair<std::string, double>> fields;
};

struct Report {
  std::vector<Row> rows;
  bool fuse_scaling_ok = false;     // fuse time at most linear in window length
  bool minibatch_memory_ok = false; // mini-batch peak < full-batch peak
};

Report run(const BenchConfig& cfg);

// Fixed-width table: "name | field=value ...", one row per line, '#' header.
void print_table(const Report& report, std::ostream& os);

}  // namespace tgfuse::bench
