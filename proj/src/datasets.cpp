#include "tgfuse/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tgfuse/errors.hpp"
#include "tgfuse/rng.hpp"

namespace tgfuse::data {

namespace {

static_assert(std::endian::native == std::endian::little,
              "dataset cache io assumes a little-endian host");

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#' || c == '%';
  }
  return true;
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

RawEventLog parse_edge_list(const std::string& path, EdgeFormat format) {
  std::ifstream is(path);
  if (!is) throw DataError("parse_edge_list: cannot open '" + path + "'");

  struct RawEdge {
    std::int64_t src, dst;
    double t;
  };
  std::vector<RawEdge> raw;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> cols;
    double v;
    while (ls >> v) cols.push_back(v);
    if (!ls.eof()) {
      throw DataError("parse_edge_list: " + path + ":" + std::to_string(line_no) +
                      ": malformed line (non-numeric column)");
    }
    if (cols.size() < 3)
      throw DataError("parse_edge_list: " + path + ":" + std::to_string(line_no) +
                      ": expected at least 3 columns, got " + std::to_string(cols.size()));
    double t = 0.0;
    switch (format) {
      case EdgeFormat::SrcDstTime:
        t = cols[2];
        break;
      case EdgeFormat::SrcDstWeightTime:
        if (cols.size() < 4)
          throw DataError("parse_edge_list: " + path + ":" + std::to_string(line_no) +
                          ": src-dst-weight-time needs 4 columns");
        t = cols[3];
        break;
      case EdgeFormat::Auto:
        t = cols.size() >= 4 ? cols[3] : cols[2];
        break;
    }
    const std::int64_t src = static_cast<std::int64_t>(cols[0]);
    const std::int64_t dst = static_cast<std::int64_t>(cols[1]);
    if (src == dst) continue;  // self-loops dropped
    raw.push_back({src, dst, t});
  }
  if (raw.empty()) throw DataError("parse_edge_list: '" + path + "' holds no edges");

  RawEventLog log;
  std::unordered_map<std::int64_t, std::int32_t> dense;
  dense.reserve(raw.size());
  auto densify = [&](std::int64_t id) {
    auto [it, fresh] = dense.try_emplace(id, static_cast<std::int32_t>(log.original_ids.size()));
    if (fresh) log.original_ids.push_back(id);
    return it->second;
  };
  log.events.reserve(raw.size());
  for (const RawEdge& e : raw)
    log.events.push_back({densify(e.src), densify(e.dst), e.t});
  log.num_nodes = static_cast<std::int32_t>(log.original_ids.size());
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const EdgeEvent& a, const EdgeEvent& b) { return a.tau < b.tau; });
  return log;
}

std::vector<Snapshot> bin_snapshots(const RawEventLog& log, int num_steps, BinMode mode,
                                    TimeMode time_mode) {
  if (num_steps < 2) throw std::invalid_argument("bin_snapshots: num_steps must be >= 2");
  if (static_cast<std::size_t>(num_steps) > log.events.size())
    throw std::invalid_argument("bin_snapshots: num_steps exceeds the number of events");

  // Keeps every rescaled tau strictly inside [bin, bin+1) so any input
  // window always precedes the next snapshot's start.
  constexpr double kMaxFrac = 1.0 - 1e-9;
  std::vector<std::vector<EdgeEvent>> buckets(static_cast<std::size_t>(num_steps));

  if (mode == BinMode::EqualDuration) {
    const double t_min = log.events.front().tau;
    const double t_max = log.events.back().tau;
    const double width = (t_max - t_min) / num_steps;
    for (const EdgeEvent& e : log.events) {
      int bin = 0;
      double frac = 0.0;
      if (width > 0.0 && e.tau > t_min) {
        const double x = (e.tau - t_min) / width;
        bin = static_cast<int>(std::ceil(x)) - 1;  // boundary ties to the earlier bin
        bin = std::clamp(bin, 0, num_steps - 1);
        frac = std::clamp(x - bin, 0.0, kMaxFrac);
      }
      const double tau = time_mode == TimeMode::Rescaled ? bin + frac : bin;
      buckets[static_cast<std::size_t>(bin)].push_back({e.src, e.dst, tau});
    }
  } else {
    const std::int64_t total = static_cast<std::int64_t>(log.events.size());
    const std::int64_t per_bin = (total + num_steps - 1) / num_steps;
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;  // [lo, hi) per bin
    for (int k = 0; k < num_steps; ++k) {
      const std::int64_t lo = std::min<std::int64_t>(total, k * per_bin);
      const std::int64_t hi = std::min<std::int64_t>(total, (k + 1) * per_bin);
      ranges.emplace_back(lo, hi);
    }
    for (int k = 0; k < num_steps; ++k) {
      const auto [lo, hi] = ranges[static_cast<std::size_t>(k)];
      if (lo >= hi) continue;
      const double t_lo = log.events[static_cast<std::size_t>(lo)].tau;
      const double t_hi = log.events[static_cast<std::size_t>(hi - 1)].tau;
      const double span = t_hi - t_lo;
      for (std::int64_t i = lo; i < hi; ++i) {
        const EdgeEvent& e = log.events[static_cast<std::size_t>(i)];
        double frac = span > 0.0 ? std::clamp((e.tau - t_lo) / span, 0.0, kMaxFrac) : 0.0;
        const double tau = time_mode == TimeMode::Rescaled ? k + frac : k;
        buckets[static_cast<std::size_t>(k)].push_back({e.src, e.dst, tau});
      }
    }
  }

  std::vector<Snapshot> out;
  out.reserve(buckets.size());
  for (int k = 0; k < num_steps; ++k)
    out.push_back(Snapshot::build(std::move(buckets[static_cast<std::size_t>(k)]), log.num_nodes, k));
  return out;
}

SplitView time_split(std::span<const Snapshot> snapshots, const SplitSpec& spec) {
  if (spec.train <= 0 || spec.val <= 0 || spec.test <= 0)
    throw std::invalid_argument("time_split: split counts must be positive");
  if (static_cast<std::size_t>(spec.total()) != snapshots.size())
    throw std::invalid_argument("time_split: split sums to " + std::to_string(spec.total()) +
                                " but there are " + std::to_string(snapshots.size()) +
                                " snapshots");
  SplitView v;
  v.train = snapshots.subspan(0, static_cast<std::size_t>(spec.train));
  v.val = snapshots.subspan(static_cast<std::size_t>(spec.train), static_cast<std::size_t>(spec.val));
  v.test = snapshots.subspan(static_cast<std::size_t>(spec.train + spec.val),
                             static_cast<std::size_t>(spec.test));
  return v;
}

const std::vector<std::int32_t>* EvalNegatives::find(std::int32_t snap) const {
  for (std::size_t i = 0; i < snap_index.size(); ++i) {
    if (snap_index[i] == snap) return &dst[i];
  }
  return nullptr;
}

EvalNegatives pregenerate_eval_negatives(std::span<const Snapshot> eval_snapshots,
                                         std::int32_t num_nodes, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("pregenerate_eval_negatives: k must be >= 1");
  if (num_nodes < 2)
    throw std::invalid_argument("pregenerate_eval_negatives: need at least two nodes");
  EvalNegatives out;
  out.seed = seed;
  out.k = k;
  out.num_nodes = num_nodes;
  for (const Snapshot& s : eval_snapshots) {
    Rng rng = Rng::stream(seed, "eval-negatives", {static_cast<std::uint64_t>(s.index())});
    std::vector<std::int32_t> ds;
    ds.reserve(static_cast<std::size_t>(s.num_edges()) * k);
    for (std::int64_t p = 0; p < s.num_edges(); ++p) {
      for (int i = 0; i < k; ++i)
        ds.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes))));
    }
    out.snap_index.push_back(s.index());
    out.dst.push_back(std::move(ds));
  }
  return out;
}

void save_snapshots(std::span<const Snapshot> snapshots, std::int32_t num_nodes,
                    const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_snapshots: cannot open '" + path + "' for writing");
  os.write("TGFSNAP1", 8);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(num_nodes));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(snapshots.size()));
  for (const Snapshot& s : snapshots) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.index()));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(s.num_edges()));
    for (const EdgeEvent& e : s.edges()) {
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.src));
      write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.dst));
      write_pod<double>(os, e.tau);
    }
  }
  if (!os) throw DataError("save_snapshots: write to '" + path + "' failed");
}

std::pair<std::vector<Snapshot>, std::int32_t> load_snapshots(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_snapshots: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "TGFSNAP1", 8) != 0)
    throw DataError("load_snapshots: '" + path + "' is not a snapshot cache");
  const std::int32_t num_nodes = static_cast<std::int32_t>(read_pod<std::uint32_t>(is));
  const std::uint32_t count = read_pod<std::uint32_t>(is);
  std::vector<Snapshot> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::int32_t index = static_cast<std::int32_t>(read_pod<std::uint32_t>(is));
    const std::uint64_t edges = read_pod<std::uint64_t>(is);
    std::vector<EdgeEvent> ev;
    ev.reserve(edges);
    for (std::uint64_t e = 0; e < edges; ++e) {
      const std::int32_t src = static_cast<std::int32_t>(read_pod<std::uint32_t>(is));
      const std::int32_t dst = static_cast<std::int32_t>(read_pod<std::uint32_t>(is));
      const double tau = read_pod<double>(is);
      ev.push_back({src, dst, tau});
    }
    if (!is) throw DataError("load_snapshots: '" + path + "' is truncated");
    out.push_back(Snapshot::build(std::move(ev), num_nodes, index));
  }
  return {std::move(out), num_nodes};
}

void save_negatives(const EvalNegatives& negs, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("save_negatives: cannot open '" + path + "' for writing");
  os.write("TGFNEG01", 8);
  write_pod<std::uint64_t>(os, negs.seed);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(negs.k));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(negs.num_nodes));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(negs.snap_index.size()));
  for (std::size_t i = 0; i < negs.snap_index.size(); ++i) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(negs.snap_index[i]));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(negs.dst[i].size()));
    for (std::int32_t d : negs.dst[i]) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  }
  if (!os) throw DataError("save_negatives: write to '" + path + "' failed");
}

EvalNegatives load_negatives(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("load_negatives: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "TGFNEG01", 8) != 0)
    throw DataError("load_negatives: '" + path + "' is not a negatives file");
  EvalNegatives out;
  out.seed = read_pod<std::uint64_t>(is);
  out.k = static_cast<int>(read_pod<std::uint32_t>(is));
  out.num_nodes = static_cast<std::int32_t>(read_pod<std::uint32_t>(is));
  const std::uint32_t count = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    out.snap_index.push_back(static_cast<std::int32_t>(read_pod<std::uint32_t>(is)));
    const std::uint64_t n = read_pod<std::uint64_t>(is);
    std::vector<std::int32_t> ds;
    ds.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j)
      ds.push_back(static_cast<std::int32_t>(read_pod<std::uint32_t>(is)));
    if (!is) throw DataError("load_negatives: '" + path + "' is truncated");
    out.dst.push_back(std::move(ds));
  }
  return out;
}

std::vector<Snapshot> generate_synthetic_hawkes(std::int32_t num_nodes, int base_pairs,
                                                double delta_true, int num_steps,
                                                std::uint64_t seed) {
  if (num_nodes < 2 || base_pairs < 1 || num_steps < 1)
    throw std::invalid_argument("generate_synthetic_hawkes: parameters must be positive");
  if (delta_true < 0.0)
    throw std::invalid_argument("generate_synthetic_hawkes: delta_true must be non-negative");

  Rng rng = Rng::stream(seed, "synthetic-hawkes");
  // std::map keeps pair iteration order deterministic
  std::map<std::int64_t, std::vector<double>> history;
  std::vector<Snapshot> out;
  out.reserve(static_cast<std::size_t>(num_steps));

  // Spontaneous endpoints are drawn two-tier: a small core of nodes carries
  // most of the mass. Node activity then varies persistently, and refires add
  // recency bursts on top, so decayed history genuinely ranks destinations.
  const std::int32_t core = synthetic_core_size(num_nodes);
  auto draw_endpoint = [&]() {
    if (rng.uniform01() < kSyntheticCoreMass)
      return static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(core)));
    return static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes)));
  };

  for (int t = 0; t < num_steps; ++t) {
    std::vector<EdgeEvent> edges;
    // refires driven by the decayed history of each previously fired pair
    for (const auto& [key, times] : history) {
      double intensity = 0.0;
      for (double fired_at : times)
        intensity += kSyntheticExcitation * std::exp(-delta_true * (t - fired_at));
      intensity = std::min(intensity, kSyntheticIntensityCap);
      if (rng.uniform01() < intensity) {
        const std::int32_t u = static_cast<std::int32_t>(key / num_nodes);
        const std::int32_t v = static_cast<std::int32_t>(key % num_nodes);
        edges.push_back({u, v, static_cast<double>(t)});
      }
    }
    // spontaneous fires
    for (int s = 0; s < base_pairs; ++s) {
      std::int32_t u = draw_endpoint();
      std::int32_t v = draw_endpoint();
      while (v == u) v = draw_endpoint();
      edges.push_back({u, v, static_cast<double>(t)});
    }
    for (const EdgeEvent& e : edges)
      history[static_cast<std::int64_t>(e.src) * num_nodes + e.dst].push_back(e.tau);
    out.push_back(Snapshot::build(std::move(edges), num_nodes, t));
  }
  return out;
}

}  // namespace tgfuse::data
