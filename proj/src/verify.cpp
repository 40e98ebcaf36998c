#include "tgfuse/verify.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "tgfuse/datasets.hpp"
#include "tgfuse/hawkes.hpp"
#include "tgfuse/models.hpp"
#include "tgfuse/sampling.hpp"
#include "tgfuse/train.hpp"

namespace tgfuse::verify {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

TemporalGraph make_graph(Rng& rng, std::int32_t num_nodes, int num_edges, int num_snaps,
                         bool symmetrize) {
  std::vector<std::vector<EdgeEvent>> per_snap(static_cast<std::size_t>(num_snaps));
  for (int e = 0; e < num_edges; ++e) {
    const int snap = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_snaps)));
    const std::int32_t u = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes)));
    std::int32_t v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_nodes - 1)));
    if (v >= u) ++v;
    per_snap[static_cast<std::size_t>(snap)].push_back(
        {u, v, snap + 0.999 * rng.uniform01()});
  }
  std::vector<Snapshot> snaps;
  snaps.reserve(per_snap.size());
  for (int s = 0; s < num_snaps; ++s)
    snaps.push_back(Snapshot::build(std::move(per_snap[static_cast<std::size_t>(s)]), num_nodes, s));
  return TemporalGraph::fuse(snaps, static_cast<double>(num_snaps), symmetrize);
}

Mat random_mat(Rng& rng, int rows, int cols, double lo = -2.0, double hi = 2.0) {
  Mat m(rows, cols);
  for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// tr(F^T L F) by dense loops; the matrix route of the identity.
double trace_quadratic(const Mat& f, const Mat& l) {
  const int n = f.rows(), d = f.cols();
  double total = 0.0;
  for (int c = 0; c < d; ++c) {
    for (int i = 0; i < n; ++i) {
      double lf = 0.0;
      for (int j = 0; j < n; ++j) lf += l.at(i, j) * f.at(j, c);
      total += f.at(i, c) * lf;
    }
  }
  return total;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); }

models::ModelConfig small_model_config() {
  models::ModelConfig mc;
  mc.feature_dim = 3;
  mc.hidden = 4;
  mc.layers = 2;
  mc.dropout = 0.0;
  mc.use_bn = false;
  return mc;
}

}  // namespace

TemporalGraph random_temporal_graph(Rng& rng, int max_nodes, int max_edges) {
  const std::int32_t n = 2 + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(max_nodes - 1)));
  const int edges = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_edges)));
  const int snaps = 1 + static_cast<int>(rng.below(4));
  return make_graph(rng, n, edges, snaps, true);
}

CheckResult check_decay_identity(int instances, std::uint64_t base_seed, double fault_injection) {
  CheckResult res;
  res.name = "decay-smoothness-identity";
  res.pass = true;
  const double t0 = now_seconds();
  for (int inst = 0; inst < instances; ++inst) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(inst);
    Rng rng(seed);
    TemporalGraph g = random_temporal_graph(rng, 30, 200);
    const double delta = rng.uniform(0.0, 2.0);
    const int d = 1 + static_cast<int>(rng.below(8));
    Mat f = random_mat(rng, g.num_nodes(), d);

    hawkes::ExcitationMatrix c = hawkes::excitation_matrix(g, delta);
    Mat l = hawkes::hawkes_laplacian(c);
    const double lhs = trace_quadratic(f, l);
    const double rhs = hawkes::pairwise_decay_sum(f, g, delta) + fault_injection;
    const double err = rel_err(lhs, rhs);
    if (err > res.max_err) res.max_err = err;
    if (err > 1e-9 && res.pass) {
      res.pass = false;
      res.detail = "identity violated at seed " + std::to_string(seed);
    }
  }
  res.seconds = now_seconds() - t0;
  return res;
}

CheckResult check_gradients(int instances, std::uint64_t base_seed) {
  CheckResult res;
  res.name = "gradient-soundness";
  res.pass = true;
  const double t0 = now_seconds();
  constexpr double kEps = 1e-6;

  for (int inst = 0; inst < instances && res.pass; ++inst) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(inst);
    for (models::Kind kind : {models::Kind::HawkesGcn, models::Kind::HawkesGat}) {
      Rng rng(seed);
      const std::int32_t n = 10;
      TemporalGraph g0 = make_graph(rng, n, 40, 3, true);
      auto fused = std::make_shared<const TemporalGraph>(std::move(g0));

      Rng init = Rng::stream(seed, "verify-init");
      models::Model model(kind, small_model_config(), n, init);
      models::PreparedGraph prep = model.prepare(fused);

      std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
      std::vector<double> labels;
      for (int p = 0; p < 6; ++p) {
        pairs.emplace_back(static_cast<std::int32_t>(rng.below(n)),
                           static_cast<std::int32_t>(rng.below(n)));
        labels.push_back(rng.below(2) == 0 ? 0.0 : 1.0);
      }

      auto loss_value = [&]() {
        nn::Tape t;
        Rng dr(0);
        nn::NodeId h = model.encode(t, prep, {}, true, dr);
        nn::NodeId preds = model.decode(t, h, pairs);
        return t.value(t.bce_mean(preds, labels)).at(0, 0);
      };

      std::vector<nn::Parameter*> params = model.parameters();
      for (nn::Parameter* p : params) p->zero_grad();
      {
        nn::Tape t;
        Rng dr(0);
        nn::NodeId h = model.encode(t, prep, {}, true, dr);
        nn::NodeId preds = model.decode(t, h, pairs);
        t.backward(t.bce_mean(preds, labels));
      }

      for (nn::Parameter* p : params) {
        for (std::int64_t i = 0; i < p->value.size(); ++i) {
          const double keep = p->value.data()[i];
          p->value.data()[i] = keep + kEps;
          const double up = loss_value();
          p->value.data()[i] = keep - kEps;
          const double down = loss_value();
          p->value.data()[i] = keep;
          const double fd = (up - down) / (2.0 * kEps);
          const double an = p->grad.data()[i];
          const double err = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
          if (err > res.max_err) res.max_err = err;
          if (err > 1e-4 && res.pass) {
            res.pass = false;
            res.detail = "gradient mismatch in '" + p->name + "' (" +
                         models::kind_to_string(kind) + ", seed " + std::to_string(seed) + ")";
          }
        }
      }
    }
  }
  res.seconds = now_seconds() - t0;
  return res;
}

CheckResult check_delta0_collapse(int instances, std::uint64_t base_seed) {
  CheckResult res;
  res.name = "delta0-collapse";
  res.pass = true;
  const double t0 = now_seconds();

  for (int inst = 0; inst < instances; ++inst) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(inst);
    Rng rng(seed);
    TemporalGraph g = random_temporal_graph(rng, 20, 120);
    TemporalGraph dedup = g.deduplicated(false);
    const DegreeVector deg = dedup.binary_degrees();
    const std::int32_t n = g.num_nodes();

    Rng init_h = Rng::stream(seed, "collapse-h");
    models::HawkesGcnLayer hawkes_layer(n, 3, 4, false, "h", init_h);
    hawkes_layer.delta_raw.value.fill(-1000.0);  // softplus underflows to exactly 0
    hawkes_layer.weight_root.value.fill(0.0);

    Rng init_p = Rng::stream(seed, "collapse-p");
    models::GcnLayer plain_layer(3, 4, "p", init_p);
    plain_layer.weight.value = hawkes_layer.weight.value;

    Mat h0 = random_mat(rng, n, 3);
    nn::Tape t1;
    const Mat& out_h =
        t1.value(hawkes_layer.forward(t1, t1.constant(h0), dedup, deg, {}, false));
    nn::Tape t2;
    const Mat& out_p = t2.value(plain_layer.forward(t2, t2.constant(h0), dedup, deg));

    for (std::int64_t i = 0; i < out_h.size(); ++i) {
      const double err = std::abs(out_h.data()[i] - out_p.data()[i]);
      if (err > res.max_err) res.max_err = err;
      if (err > 1e-12 && res.pass) {
        res.pass = false;
        res.detail = "collapse mismatch at seed " + std::to_string(seed);
      }
    }
  }
  res.seconds = now_seconds() - t0;
  return res;
}

CheckResult check_batch_equivalence(std::uint64_t seed) {
  CheckResult res;
  res.name = "minibatch-equivalence";
  res.pass = true;
  const double t0 = now_seconds();

  // --- embedding equality on one exhaustive batch ---
  std::vector<Snapshot> snaps = data::generate_synthetic_hawkes(500, 900, 0.5, 12, seed);
  const int target = 11;
  auto fused = std::make_shared<const TemporalGraph>(
      TemporalGraph::fuse(std::span(snaps.data() + 2, 9), static_cast<double>(target), true));

  models::ModelConfig mc;
  mc.feature_dim = 8;
  mc.hidden = 16;
  mc.layers = 2;
  mc.dropout = 0.0;
  Rng init = Rng::stream(seed, "equiv-init");
  models::Model model(models::Kind::HawkesGat, mc, 500, init);
  models::PreparedGraph prep = model.prepare(fused);

  std::vector<sampling::LabeledEdge> labeled;
  for (const EdgeEvent& e : snaps[target].edges()) labeled.push_back({e.src, e.dst, 1.0});
  std::vector<int> fanout{-1, -1};
  std::vector<sampling::Batch> batches =
      sampling::link_neighbor_batches(*fused, labeled, 1 << 30, fanout, seed);
  if (batches.size() != 1) {
    res.pass = false;
    res.detail = "expected a single exhaustive batch";
    res.seconds = now_seconds() - t0;
    return res;
  }
  const sampling::Batch& batch = batches.front();

  Rng dr(0);
  nn::Tape tf;
  const Mat& h_full = tf.value(model.encode(tf, prep, {}, false, dr));

  auto local = std::make_shared<const TemporalGraph>(TemporalGraph::from_edges(
      static_cast<std::int32_t>(batch.local_to_global.size()), batch.sub_edges,
      batch.window_end, batch.window_begin, batch.window_count));
  models::PreparedGraph lprep = model.prepare_local(local, prep, batch.local_to_global);
  nn::Tape tb;
  const Mat& h_batch = tb.value(model.encode(tb, lprep, batch.local_to_global, false, dr));

  // only target endpoints are guaranteed exact
  double emb_err = 0.0;
  for (const auto& [ls, ld] : batch.edge_label_index) {
    for (int lid : {static_cast<int>(ls), static_cast<int>(ld)}) {
      const int gid = static_cast<int>(batch.local_to_global[static_cast<std::size_t>(lid)]);
      for (int c = 0; c < mc.hidden; ++c)
        emb_err = std::max(emb_err, std::abs(h_batch.at(lid, c) - h_full.at(gid, c)));
    }
  }
  res.max_err = emb_err;
  if (emb_err > 1e-5) {
    res.pass = false;
    res.detail = "target embeddings diverge (seed " + std::to_string(seed) + ")";
  }

  // --- 3-step parameter trajectory, full vs one-batch-per-target mini ---
  train::DatasetBundle bundle;
  bundle.snapshots = std::move(snaps);
  bundle.num_nodes = 500;
  bundle.split = {10, 1, 1};
  bundle.eval_negs = data::pregenerate_eval_negatives(
      std::span(bundle.snapshots.data() + 10, 2), 500, 5, 123);

  train::RunConfig base;
  base.model = models::Kind::HawkesGat;
  base.window = 9;
  base.hidden = 16;
  base.feature_dim = 8;
  base.dropout = 0.0;
  base.seed = seed;
  base.k_train = 1;

  train::RunConfig full_cfg = base;
  train::RunConfig mini_cfg = base;
  mini_cfg.minibatch = true;
  mini_cfg.batch_size = 1 << 30;
  mini_cfg.fanout = {-1, -1};

  train::Trainer full(full_cfg, bundle);
  train::Trainer mini(mini_cfg, bundle);
  full.run_epoch(1, 0, 3);
  mini.run_epoch(1, 0, 3);

  double traj_err = 0.0;
  std::vector<nn::Parameter*> fp = full.model().parameters();
  std::vector<nn::Parameter*> mp = mini.model().parameters();
  for (std::size_t k = 0; k < fp.size(); ++k) {
    for (std::int64_t i = 0; i < fp[k]->value.size(); ++i)
      traj_err = std::max(traj_err, std::abs(fp[k]->value.data()[i] - mp[k]->value.data()[i]));
  }
  res.max_err = std::max(res.max_err, traj_err);
  if (traj_err > 1e-6) {
    res.pass = false;
    res.detail = "parameter trajectories diverge (seed " + std::to_string(seed) + ")";
  }
  res.seconds = now_seconds() - t0;
  return res;
}

std::vector<CheckResult> run_all() {
  std::vector<CheckResult> out;
  out.push_back(check_decay_identity(200, 41));
  out.push_back(check_gradients(20, 77));
  out.push_back(check_delta0_collapse(50, 99));
  out.push_back(check_batch_equivalence(2024));
  return out;
}

bool print_report(const std::vector<CheckResult>& results, std::ostream& os) {
  bool all = true;
  for (const CheckResult& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  max_err=" << r.max_err << "  ("
       << r.seconds << "s)";
    if (!r.detail.empty()) os << "  " << r.detail;
    os << "\n";
    all = all && r.pass;
  }
  return all;
}

}  // namespace tgfuse::verify
