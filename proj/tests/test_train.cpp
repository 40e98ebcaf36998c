#include "doctest.h"
#include "fixture.hpp"
#include "helpers.hpp"
#include "tgfuse/errors.hpp"
#include "tgfuse/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace tgfuse;
using testutil::make_bundle;

namespace {

// Sort-then-scan ranking oracle, independent of the counting implementation.
double sorted_rank_oracle(double pos, std::vector<double> negs) {
  std::vector<double> all = negs;
  all.push_back(pos);
  std::sort(all.begin(), all.end(), std::greater<double>());
  std::size_t greater = 0, equal = 0;
  for (double s : all) {
    if (s > pos) ++greater;
    if (s == pos) ++equal;
  }
  const double rank_opt = static_cast<double>(greater) + 1.0;
  const double rank_pess = static_cast<double>(greater + equal);
  return 2.0 / (rank_opt + rank_pess);
}

train::RunConfig small_config(models::Kind kind, std::uint64_t seed) {
  train::RunConfig cfg;
  cfg.model = kind;
  cfg.window = 4;
  cfg.hidden = 12;
  cfg.feature_dim = 8;
  cfg.dropout = 0.1;
  cfg.seed = seed;
  cfg.max_epochs = 3;
  cfg.patience = 20;
  return cfg;
}

}  // namespace

TEST_CASE("reciprocal rank follows the optimistic/pessimistic tie convention") {
  std::vector<double> negs(100, 0.3);
  CHECK(train::reciprocal_rank(0.9, negs) == 1.0);         // outscores all
  CHECK(train::reciprocal_rank(0.1, negs) == doctest::Approx(1.0 / 101.0));  // below all
  CHECK(train::reciprocal_rank(0.3, negs) == doctest::Approx(1.0 / 51.0));   // ties all
}

TEST_CASE("reciprocal rank matches the sort oracle on tie-rich score sets") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const double pos = static_cast<double>(rng.below(10)) / 10.0;
    std::vector<double> negs;
    const int k = 1 + static_cast<int>(rng.below(100));
    for (int i = 0; i < k; ++i) negs.push_back(static_cast<double>(rng.below(10)) / 10.0);
    const double got = train::reciprocal_rank(pos, negs);
    const double want = sorted_rank_oracle(pos, negs);
    CHECK(std::abs(got - want) <= 1e-12);
    CHECK(got >= 1.0 / (static_cast<double>(k) + 1.0));
    CHECK(got <= 1.0);
  }
}

TEST_CASE("early stopper never fires on a strictly improving history") {
  train::EarlyStopper s(3);
  for (int epoch = 1; epoch <= 50; ++epoch) {
    CHECK(s.observe(0.01 * epoch, epoch));
    CHECK_FALSE(s.should_stop());
  }
  CHECK(s.best_epoch() == 50);
}

TEST_CASE("flat history of length 21 stops at epoch 21 with best epoch 1") {
  train::EarlyStopper s(20);
  int stopped_at = 0;
  for (int epoch = 1; epoch <= 21; ++epoch) {
    s.observe(0.5, epoch);
    if (s.should_stop()) {
      stopped_at = epoch;
      break;
    }
  }
  CHECK(stopped_at == 21);
  CHECK(s.best_epoch() == 1);
}

TEST_CASE("early stopper decision matches a scalar replay oracle on noisy history") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int patience = 1 + static_cast<int>(rng.below(6));
    std::vector<double> history;
    for (int e = 0; e < 40; ++e) history.push_back(rng.uniform01());

    train::EarlyStopper s(patience);
    int stopped_at = -1;
    for (int e = 0; e < 40 && stopped_at < 0; ++e) {
      s.observe(history[static_cast<std::size_t>(e)], e + 1);
      if (s.should_stop()) stopped_at = e + 1;
    }

    // replay: best index, stop after `patience` consecutive non-improvements
    double best = -1.0;
    int best_at = 0, stale = 0, want_stop = -1;
    for (int e = 0; e < 40 && want_stop < 0; ++e) {
      if (history[static_cast<std::size_t>(e)] > best) {
        best = history[static_cast<std::size_t>(e)];
        best_at = e + 1;
        stale = 0;
      } else if (++stale >= patience) {
        want_stop = e + 1;
      }
    }
    CHECK(stopped_at == want_stop);
    if (stopped_at > 0) CHECK(s.best_epoch() == best_at);
  }
}

TEST_CASE("metrics records serialize with the fixed field names") {
  train::MetricsRecord r{3, "val", 0.51, 0.22, 1.75, 12.0};
  const std::string line = train::format_record(r);
  CHECK(line.find("epoch=3") != std::string::npos);
  CHECK(line.find("split=val") != std::string::npos);
  CHECK(line.find("loss=0.51") != std::string::npos);
  CHECK(line.find("mrr100=0.22") != std::string::npos);
  CHECK(line.find("seconds=") != std::string::npos);
  CHECK(line.find("peak_mb=") != std::string::npos);
}

TEST_CASE("one train target and one epoch take exactly one optimizer step") {
  // split(2,1,1): the only trainable target is snapshot index 1
  auto bundle = make_bundle(60, 80, 0.5, 4, {2, 1, 1}, 10, 3);
  train::Trainer t(small_config(models::Kind::HawkesGcn, 1), bundle);
  REQUIRE(t.train_targets() == std::vector<int>{1});
  train::EpochStats stats = t.run_epoch(1);
  CHECK(stats.steps == 1);
  CHECK(t.optimizer().step_count() == 1);
}

TEST_CASE("zero learning rate freezes parameters and the loss function") {
  auto bundle = make_bundle(60, 80, 0.5, 6, {4, 1, 1}, 10, 3);
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 5);
  cfg.lr = 0.0;
  cfg.dropout = 0.0;
  train::Trainer t(cfg, bundle);
  std::vector<double> before;
  for (nn::Parameter* p : t.model().parameters())
    before.insert(before.end(), p->value.data(), p->value.data() + p->value.size());

  const double l1 = t.run_epoch(1).loss;
  const double l1_again = t.run_epoch(1).loss;  // same epoch, same negative stream
  CHECK(l1 == l1_again);
  t.run_epoch(2);

  std::vector<double> after;
  for (nn::Parameter* p : t.model().parameters())
    after.insert(after.end(), p->value.data(), p->value.data() + p->value.size());
  CHECK(before == after);
}

TEST_CASE("training loss strictly decreases over the first five epochs on the fixture") {
  auto bundle = make_bundle(100, 200, 0.5, 8, {6, 1, 1}, 20, 7);
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 7);
  cfg.max_epochs = 5;
  train::Trainer t(cfg, bundle);
  double prev = 1e300;
  for (int epoch = 1; epoch <= 5; ++epoch) {
    const double loss = t.run_epoch(epoch).loss;
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("mini-batch with batch_size one steps once per labeled edge") {
  auto bundle = make_bundle(40, 30, 0.5, 4, {2, 1, 1}, 5, 9);
  train::RunConfig cfg = small_config(models::Kind::HawkesGat, 2);
  cfg.minibatch = true;
  cfg.batch_size = 1;
  cfg.k_train = 1;
  train::Trainer t(cfg, bundle);
  const std::int64_t labeled =
      2 * static_cast<std::int64_t>(bundle.snapshots[1].num_edges());  // positives + 1 negative each
  CHECK(t.run_epoch(1).steps == labeled);
}

TEST_CASE("single-batch mini training reproduces the full-batch loss sequence") {
  auto bundle = make_bundle(80, 120, 0.5, 6, {4, 1, 1}, 10, 11);
  train::RunConfig full = small_config(models::Kind::HawkesGat, 4);
  full.dropout = 0.0;
  train::RunConfig mini = full;
  mini.minibatch = true;
  mini.batch_size = 1 << 30;
  mini.fanout = {-1, -1};

  train::Trainer tf(full, bundle);
  train::Trainer tm(mini, bundle);
  for (int epoch = 1; epoch <= 3; ++epoch) {
    const double lf = tf.run_epoch(epoch).loss;
    const double lm = tm.run_epoch(epoch).loss;
    CHECK(std::abs(lf - lm) <= 1e-4);
  }
  // parameter trajectories stay within 1e-6 as well
  auto pf = tf.model().parameters();
  auto pm = tm.model().parameters();
  for (std::size_t k = 0; k < pf.size(); ++k)
    CHECK(testutil::max_abs_diff(pf[k]->value, pm[k]->value) <= 1e-6);
}

TEST_CASE("interrupt and resume from saved state replays the epoch exactly") {
  auto bundle = make_bundle(60, 60, 0.5, 5, {3, 1, 1}, 5, 13);
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 6);
  cfg.minibatch = true;
  cfg.batch_size = 16;

  train::Trainer uninterrupted(cfg, bundle);
  uninterrupted.run_epoch(1);

  train::Trainer first_half(cfg, bundle);
  first_half.run_epoch(1, 0, 3);  // stop after 3 optimizer steps
  nn::MatStore state = first_half.save_state();

  train::Trainer second_half(cfg, bundle);
  second_half.load_state(state);
  second_half.run_epoch(1, 3, -1);  // resume where the interrupt happened

  auto pa = uninterrupted.model().parameters();
  auto pb = second_half.model().parameters();
  for (std::size_t k = 0; k < pa.size(); ++k)
    CHECK(testutil::max_abs_diff(pa[k]->value, pb[k]->value) == 0.0);
  // subsequent metrics are identical too
  CHECK(uninterrupted.evaluate(train::Split::Val).mrr ==
        second_half.evaluate(train::Split::Val).mrr);
}

TEST_CASE("evaluation is pure and repeatable") {
  auto bundle = make_bundle(60, 80, 0.5, 5, {3, 1, 1}, 10, 15);
  train::Trainer t(small_config(models::Kind::HawkesGat, 8), bundle);
  t.run_epoch(1);
  const auto a = t.evaluate(train::Split::Val);
  const auto b = t.evaluate(train::Split::Val);
  CHECK(a.mrr == b.mrr);
  CHECK(a.loss == b.loss);
  CHECK(a.mrr >= 1.0 / 11.0);  // k_eval = 10
  CHECK(a.mrr <= 1.0);
}

TEST_CASE("windows never include the target snapshot or anything later") {
  auto bundle = make_bundle(50, 40, 0.5, 8, {6, 1, 1}, 5, 17);
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 9);
  cfg.window = 3;
  train::Trainer t(cfg, bundle);
  for (int target : t.train_targets()) {
    const models::PreparedGraph& prep = t.window_for(target);
    for (std::int32_t snap : prep.graph->pairs().event_snap) CHECK(snap < target);
    CHECK(prep.graph->window_end() == static_cast<double>(target));
    // truncated window at the start, full window later
    CHECK(prep.graph->window_begin() == std::max(0, target - 3));
  }
}

TEST_CASE("evaluate rejects a missing negatives table") {
  auto bundle = make_bundle(50, 40, 0.5, 5, {3, 1, 1}, 5, 19);
  bundle.eval_negs.snap_index.clear();
  bundle.eval_negs.dst.clear();
  train::Trainer t(small_config(models::Kind::HawkesGcn, 10), bundle);
  CHECK_THROWS_AS(t.evaluate(train::Split::Val), DataError);
}

TEST_CASE("trainer run emits records, checkpoints and restores the best epoch") {
  auto bundle = make_bundle(60, 80, 0.5, 6, {4, 1, 1}, 10, 21);
  train::RunConfig cfg = small_config(models::Kind::HawkesGat, 11);
  cfg.max_epochs = 4;
  train::Trainer t(cfg, bundle);
  std::ostringstream metrics;
  train::TrainResult res = t.run(&metrics, "");
  CHECK(res.best_epoch >= 1);
  CHECK(res.best_epoch <= 4);
  CHECK(res.test_mrr > 0.0);
  int train_lines = 0, val_lines = 0, test_lines = 0;
  std::istringstream is(metrics.str());
  std::string line;
  while (std::getline(is, line)) {
    if (line.find("split=train") != std::string::npos) ++train_lines;
    if (line.find("split=val") != std::string::npos) ++val_lines;
    if (line.find("split=test") != std::string::npos) ++test_lines;
  }
  CHECK(train_lines == 4);
  CHECK(val_lines == 4);
  CHECK(test_lines == 1);
  // best params stored under every parameter name
  for (nn::Parameter* p : t.model().parameters()) CHECK(res.best_params.has(p->name));
}

TEST_CASE("run config validation rejects nonsense") {
  train::RunConfig cfg;
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.fanout = {1, 2, 3};  // three caps for two layers
  auto bundle = make_bundle(40, 30, 0.5, 4, {2, 1, 1}, 5, 23);
  CHECK_THROWS_AS(train::Trainer(cfg, bundle), UsageError);
}

TEST_CASE("targets without positives are skipped instead of crashing") {
  auto bundle = make_bundle(50, 40, 0.5, 6, {4, 1, 1}, 5, 27);
  // hollow out snapshot 2: training must skip it and still step on the rest
  std::vector<Snapshot> snaps;
  for (const Snapshot& s : bundle.snapshots) {
    if (s.index() == 2)
      snaps.push_back(Snapshot::build({}, bundle.num_nodes, 2));
    else
      snaps.push_back(s);
  }
  bundle.snapshots = std::move(snaps);
  train::Trainer t(small_config(models::Kind::HawkesGcn, 12), bundle);
  // targets 1, 2, 3 with 2 empty: exactly two optimizer steps
  CHECK(t.run_epoch(1).steps == 2);
  CHECK(t.evaluate(train::Split::Val).mrr > 0.0);
}

TEST_CASE("skip_short_windows drops targets without a full history") {
  auto bundle = make_bundle(50, 40, 0.5, 8, {6, 1, 1}, 5, 29);
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 13);
  cfg.window = 3;
  cfg.skip_short_windows = true;
  train::Trainer t(cfg, bundle);
  CHECK(t.train_targets() == std::vector<int>{3, 4, 5});
  for (int target : t.train_targets())
    CHECK(t.window_for(target).graph->window_begin() == target - 3);
}

TEST_CASE("mini-batch embeddings match full-graph for the gcn kind too") {
  auto bundle = make_bundle(150, 250, 0.5, 8, {6, 1, 1}, 5, 31);
  const int target = 5;
  train::RunConfig cfg = small_config(models::Kind::HawkesGcn, 14);
  cfg.dropout = 0.0;
  train::Trainer t(cfg, bundle);
  const models::PreparedGraph& prep = t.window_for(target);

  std::vector<sampling::LabeledEdge> labeled;
  for (const auto& [s, d] : t.positives_of(target)) labeled.push_back({s, d, 1.0});
  std::vector<int> fanout{-1, -1};
  auto batches = sampling::link_neighbor_batches(*prep.graph, labeled, 1 << 30, fanout, 33);
  REQUIRE(batches.size() == 1);
  const sampling::Batch& b = batches.front();

  nn::Tape tf;
  Rng dr(0);
  const Mat& h_full = tf.value(t.model().encode(tf, prep, {}, false, dr));

  auto local = std::make_shared<const TemporalGraph>(TemporalGraph::from_edges(
      static_cast<std::int32_t>(b.local_to_global.size()), b.sub_edges, b.window_end,
      b.window_begin, b.window_count));
  models::PreparedGraph lprep = t.model().prepare_local(local, prep, b.local_to_global);
  nn::Tape tb;
  const Mat& h_batch = tb.value(t.model().encode(tb, lprep, b.local_to_global, false, dr));

  double worst = 0.0;
  for (const auto& [ls, ld] : b.edge_label_index) {
    for (int lid : {static_cast<int>(ls), static_cast<int>(ld)}) {
      const int gid = static_cast<int>(b.local_to_global[static_cast<std::size_t>(lid)]);
      for (int c = 0; c < h_full.cols(); ++c)
        worst = std::max(worst, std::abs(h_batch.at(lid, c) - h_full.at(gid, c)));
    }
  }
  CHECK(worst <= 1e-5);
}
