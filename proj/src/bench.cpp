#include "tgfuse/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <memory>

#include "tgfuse/kernels.hpp"
#include "tgfuse/models.hpp"
#include "tgfuse/optim.hpp"
#include "tgfuse/rng.hpp"
#include "tgfuse/sampling.hpp"

namespace tgfuse::bench {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::vector<Snapshot> uniform_stream(std::int32_t num_nodes, std::int64_t edges_per_snapshot,
                                     int num_snapshots, Rng& rng) {
  std::vector<Snapshot> out;
  out.reserve(static_cast<std::size_t>(num_snapshots));
  for (int s = 0; s < num_snapshots; ++s) {
    std::vector<EdgeEvent> edges;
    edges.reserve(static_cast<std::size_t>(edges_per_snapshot));
    for (std::int64_t e = 0; e < edges_per_snapshot; ++e) {
      const std::int32_t u = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes)));
      std::int32_t v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes - 1)));
      if (v >= u) ++v;
      edges.push_back({u, v, s + 0.999 * rng.uniform01()});
    }
    out.push_back(Snapshot::build(std::move(edges), num_nodes, s));
  }
  return out;
}

// One full-batch optimizer step on the fused window; returns the wall time.
double train_step(models::Model& model, nn::Adam& adam, const models::PreparedGraph& prep,
                  std::span<const sampling::LabeledEdge> labeled, std::uint64_t seed) {
  const double t0 = now_seconds();
  nn::Tape tape;
  Rng dr(seed);
  nn::NodeId h = model.encode(tape, prep, {}, true, dr);
  std::vector<std::pair<std::int32_t, std::int32_t>> idx;
  std::vector<double> labels;
  for (const sampling::LabeledEdge& e : labeled) {
    idx.emplace_back(e.src, e.dst);
    labels.push_back(e.label);
  }
  nn::NodeId loss = tape.bce_mean(model.decode(tape, h, idx), std::move(labels));
  tape.backward(loss);
  adam.step(1e-3);
  return now_seconds() - t0;
}

std::vector<sampling::LabeledEdge> label_with_negatives(const Snapshot& target,
                                                        std::int32_t num_nodes,
                                                        std::int64_t cap, std::uint64_t seed) {
  std::vector<std::pair<std::int32_t, std::int32_t>> pos;
  for (const EdgeEvent& e : target.edges()) {
    if (static_cast<std::int64_t>(pos.size()) >= cap) break;
    pos.emplace_back(e.src, e.dst);
  }
  sampling::NegativeSet negs = sampling::sample_negatives(pos, num_nodes, 1, seed);
  std::vector<sampling::LabeledEdge> out;
  out.reserve(pos.size() * 2);
  for (std::size_t p = 0; p < pos.size(); ++p) {
    out.push_back({pos[p].first, pos[p].second, 1.0});
    out.push_back({pos[p].first, negs.for_positive(p)[0], 0.0});
  }
  return out;
}

}  // namespace

Report run(const BenchConfig& cfg) {
  Report rep;
  Rng rng = Rng::stream(cfg.seed, "bench");

  // -- kernel comparison: serial reference vs OpenMP --
  {
    const std::int32_t n = std::max<std::int32_t>(1000, cfg.stream_nodes / 4);
    const std::int64_t edges = cfg.kernel_rows;
    std::vector<Snapshot> snaps = uniform_stream(n, edges, 1, rng);
    TemporalGraph g = TemporalGraph::fuse(snaps, 1.0, true);
    const PairIndex& adj = g.pairs();
    const int d = cfg.kernel_dim;
    Mat x(n, d);
    for (std::int64_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    std::vector<double> coeff(static_cast<std::size_t>(adj.num_pairs()));
    for (double& c : coeff) c = rng.uniform01();
    std::vector<double> delta(static_cast<std::size_t>(n));
    for (double& v : delta) v = rng.uniform(0.0, 2.0);
    std::vector<double> inv_norm(static_cast<std::size_t>(adj.num_pairs()), 1.0);

    auto time_pair = [&](const char* name, auto&& serial_fn, auto&& omp_fn) {
      double t0 = now_seconds();
      serial_fn();
      const double serial_ms = (now_seconds() - t0) * 1e3;
      t0 = now_seconds();
      omp_fn();
      const double omp_ms = (now_seconds() - t0) * 1e3;
      rep.rows.push_back({std::string("kernel/") + name,
                          {{"serial_ms", serial_ms},
                           {"omp_ms", omp_ms},
                           {"speedup", omp_ms > 0.0 ? serial_ms / omp_ms : 0.0}}});
    };

    Mat ma(4096, d), mb(d, d), mout;
    for (std::int64_t i = 0; i < ma.size(); ++i) ma.data()[i] = rng.uniform(-1.0, 1.0);
    for (std::int64_t i = 0; i < mb.size(); ++i) mb.data()[i] = rng.uniform(-1.0, 1.0);
    time_pair("matmul", [&] { kernels::serial::matmul(ma, mb, mout); },
              [&] { kernels::matmul(ma, mb, mout); });

    Mat gout;
    time_pair("coeff_gather", [&] { kernels::serial::coeff_gather(adj, coeff, x, gout); },
              [&] { kernels::coeff_gather(adj, coeff, x, gout); });

    std::vector<double> decay_out(coeff.size());
    time_pair("node_decay",
              [&] { kernels::serial::node_decay(adj, delta, 1.0, inv_norm, decay_out); },
              [&] { kernels::node_decay(adj, delta, 1.0, inv_norm, decay_out); });

    std::vector<std::int64_t> offsets{0};
    for (std::int32_t i = 0; i < adj.num_nodes; ++i) {
      if (adj.row_ptr[i + 1] > adj.row_ptr[i]) offsets.push_back(adj.row_ptr[i + 1]);
    }
    std::vector<double> soft_out(coeff.size());
    time_pair("segment_softmax",
              [&] { kernels::serial::segment_softmax(coeff, offsets, soft_out); },
              [&] { kernels::segment_softmax(coeff, offsets, soft_out); });
  }

  // -- fuse + epoch wall time vs window length --
  {
    const int w_max = *std::max_element(cfg.windows.begin(), cfg.windows.end());
    std::vector<Snapshot> snaps =
        uniform_stream(cfg.stream_nodes, cfg.stream_edges_per_snapshot, w_max + 1, rng);
    double fuse_ms_min = 0.0, fuse_ms_max = 0.0;
    int w_min = *std::min_element(cfg.windows.begin(), cfg.windows.end());
    std::int64_t edges_min = 0, edges_max = 0;
    for (int w : cfg.windows) {
      const double t0 = now_seconds();
      auto fused = std::make_shared<const TemporalGraph>(TemporalGraph::fuse(
          std::span(snaps.data() + (w_max - w), static_cast<std::size_t>(w)),
          static_cast<double>(w_max), true));
      const double fuse_ms = (now_seconds() - t0) * 1e3;

      models::ModelConfig mc;
      mc.feature_dim = 16;
      mc.hidden = 16;
      mc.layers = 2;
      mc.dropout = 0.0;
      Rng init = Rng::stream(cfg.seed, "bench-init", {static_cast<std::uint64_t>(w)});
      // the GCN kind aggregates without per-pair gathers, so epoch timing
      // stays within memory even at the largest fused window
      models::Model model(models::Kind::HawkesGcn, mc, cfg.stream_nodes, init);
      nn::Adam adam(model.parameters());
      models::PreparedGraph prep = model.prepare(fused);
      std::vector<sampling::LabeledEdge> labeled =
          label_with_negatives(snaps.back(), cfg.stream_nodes, 2000, cfg.seed + w);
      const double epoch_s = train_step(model, adam, prep, labeled, cfg.seed);

      rep.rows.push_back({"fuse/w=" + std::to_string(w),
                          {{"fuse_ms", fuse_ms},
                           {"epoch_ms", epoch_s * 1e3},
                           {"edges", static_cast<double>(fused->num_edges())}}});
      if (w == w_min) {
        fuse_ms_min = fuse_ms;
        edges_min = fused->num_edges();
      }
      if (w == w_max) {
        fuse_ms_max = fuse_ms;
        edges_max = fused->num_edges();
      }
    }
    const double ratio = static_cast<double>(w_max) / w_min;
    rep.fuse_scaling_ok = edges_max == static_cast<std::int64_t>(edges_min * ratio) &&
                          fuse_ms_max <= 3.0 * ratio * std::max(fuse_ms_min, 0.5);
  }

  // -- full-batch vs mini-batch peak tape memory on one window --
  {
    std::vector<Snapshot> snaps =
        uniform_stream(cfg.mem_nodes, cfg.mem_edges_per_snapshot, cfg.mem_window + 1, rng);
    auto fused = std::make_shared<const TemporalGraph>(TemporalGraph::fuse(
        std::span(snaps.data(), static_cast<std::size_t>(cfg.mem_window)),
        static_cast<double>(cfg.mem_window), true));
    std::vector<sampling::LabeledEdge> labeled = label_with_negatives(
        snaps[static_cast<std::size_t>(cfg.mem_window)], cfg.mem_nodes, cfg.mem_positive_cap,
        cfg.seed + 101);

    models::ModelConfig mc;
    mc.feature_dim = 16;
    mc.hidden = cfg.mem_hidden;
    mc.layers = 2;
    mc.dropout = 0.0;

    double full_peak_mb = 0.0, mini_peak_mb = 0.0;
    {
      Rng init = Rng::stream(cfg.seed, "bench-mem-full");
      models::Model model(models::Kind::HawkesGat, mc, cfg.mem_nodes, init);
      nn::Adam adam(model.parameters());
      models::PreparedGraph prep = model.prepare(fused);
      memtrack::reset_peak();
      const double secs = train_step(model, adam, prep, labeled, cfg.seed);
      full_peak_mb = static_cast<double>(memtrack::peak_bytes()) / (1024.0 * 1024.0);
      rep.rows.push_back(
          {"memory/full-batch", {{"peak_mb", full_peak_mb}, {"step_ms", secs * 1e3}}});
    }
    {
      Rng init = Rng::stream(cfg.seed, "bench-mem-mini");
      models::Model model(models::Kind::HawkesGat, mc, cfg.mem_nodes, init);
      nn::Adam adam(model.parameters());
      models::PreparedGraph prep = model.prepare(fused);
      std::vector<int> fanout{-1, -1};
      std::vector<sampling::Batch> batches =
          sampling::link_neighbor_batches(*fused, labeled, cfg.mem_batch_size, fanout, cfg.seed);
      memtrack::reset_peak();
      const double t0 = now_seconds();
      for (const sampling::Batch& b : batches) {
        auto local = std::make_shared<const TemporalGraph>(TemporalGraph::from_edges(
            static_cast<std::int32_t>(b.local_to_global.size()), b.sub_edges, b.window_end,
            b.window_begin, b.window_count));
        models::PreparedGraph lprep = model.prepare_local(local, prep, b.local_to_global);
        nn::Tape tape;
        Rng dr(cfg.seed);
        nn::NodeId h = model.encode(tape, lprep, b.local_to_global, true, dr);
        nn::NodeId loss = tape.bce_mean(model.decode(tape, h, b.edge_label_index), b.edge_label);
        tape.backward(loss);
        adam.step(1e-3);
      }
      const double secs = now_seconds() - t0;
      mini_peak_mb = static_cast<double>(memtrack::peak_bytes()) / (1024.0 * 1024.0);
      rep.rows.push_back({"memory/mini-batch",
                          {{"peak_mb", mini_peak_mb},
                           {"step_ms", secs * 1e3},
                           {"batches", static_cast<double>(batches.size())}}});
    }
    rep.minibatch_memory_ok = mini_peak_mb < full_peak_mb;
  }

  rep.rows.push_back({"summary",
                      {{"fuse_linear", rep.fuse_scaling_ok ? 1.0 : 0.0},
                       {"mini_lt_full", rep.minibatch_memory_ok ? 1.0 : 0.0}}});
  return rep;
}

void print_table(const Report& report, std::ostream& os) {
  os << "# tgfuse bench\n";
  for (const Row& row : report.rows) {
    os << std::left << std::setw(22) << row.name << " |";
    for (const auto& [key, value] : row.fields) os << " " << key << "=" << value;
    os << "\n";
  }
}

}  // namespace tgfuse::bench
