#include "tgfuse/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "tgfuse/errors.hpp"

namespace tgfuse::train {

namespace {

std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                          std::initializer_list<std::uint64_t> idx) {
  return Rng::stream(root, name, idx).next();
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

constexpr double kBytesPerMb = 1024.0 * 1024.0;

}  // namespace

void RunConfig::validate() const {
  if (window < 1) throw UsageError("run config: window must be >= 1");
  if (hidden < 1 || layers < 1 || feature_dim < 1)
    throw UsageError("run config: hidden, layers and feature_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("run config: dropout must be in [0, 1)");
  if (lr < 0.0) throw UsageError("run config: lr must be non-negative");
  if (patience < 1 || k_train < 1 || k_eval < 1)
    throw UsageError("run config: patience, k_train and k_eval must be >= 1");
  if (t_max < 1 || max_epochs < 1)
    throw UsageError("run config: t_max and max_epochs must be >= 1");
  if (batch_size < 1) throw UsageError("run config: batch_size must be >= 1");
}

std::string format_record(const MetricsRecord& r) {
  std::ostringstream os;
  os << "epoch=" << r.epoch << " split=" << r.split << " loss=" << r.loss
     << " mrr100=" << r.mrr100 << " seconds=" << r.seconds << " peak_mb=" << r.peak_mb;
  return os.str();
}

double reciprocal_rank(double pos_score, std::span<const double> neg_scores) {
  std::int64_t greater = 0, greater_eq = 0;
  for (double s : neg_scores) {
    if (s > pos_score) ++greater;
    if (s >= pos_score) ++greater_eq;
  }
  const double rank_opt = 1.0 + static_cast<double>(greater);
  const double rank_pess = 1.0 + static_cast<double>(greater_eq);
  return 2.0 / (rank_opt + rank_pess);
}

bool EarlyStopper::observe(double value, int epoch) {
  if (value > best_) {
    best_ = value;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

Trainer::Trainer(const RunConfig& cfg, const DatasetBundle& data)
    : cfg_(cfg),
      data_(data),
      model_([&] {
        cfg.validate();
        Rng init = Rng::stream(cfg.seed, "init");
        models::ModelConfig mc;
        mc.feature_dim = cfg.feature_dim;
        mc.hidden = cfg.hidden;
        mc.layers = cfg.layers;
        mc.dropout = cfg.dropout;
        mc.use_bn = cfg.use_bn;
        return std::make_unique<models::Model>(cfg.model, mc, data.num_nodes, init);
      }()),
      adam_(model_->parameters()) {
  // fanout list normalized to one cap per encoder layer
  if (cfg_.fanout.empty()) cfg_.fanout.assign(static_cast<std::size_t>(cfg_.layers), -1);
  if (cfg_.fanout.size() == 1) cfg_.fanout.assign(static_cast<std::size_t>(cfg_.layers), cfg_.fanout[0]);
  if (cfg_.fanout.size() != static_cast<std::size_t>(cfg_.layers))
    throw UsageError("run config: fanout must list one cap per layer");

  const int total = static_cast<int>(data_.snapshots.size());
  if (data_.split.total() != total)
    throw DataError("trainer: split spec does not cover the snapshot sequence");
  for (int i = 0; i < total; ++i) {
    if (data_.snapshots[static_cast<std::size_t>(i)].index() != i)
      throw DataError("trainer: snapshot indices must be contiguous from 0");
  }
  const int first = cfg_.skip_short_windows ? cfg_.window : 1;
  for (int i = first; i < data_.split.train; ++i) train_targets_.push_back(i);
  for (int i = data_.split.train; i < data_.split.train + data_.split.val; ++i)
    val_targets_.push_back(i);
  for (int i = data_.split.train + data_.split.val; i < total; ++i) test_targets_.push_back(i);
}

Trainer::TargetCtx& Trainer::target_ctx(int target) {
  auto it = window_cache_.find(target);
  if (it != window_cache_.end()) return it->second;

  const int begin = std::max(0, target - cfg_.window);
  std::span<const Snapshot> window(data_.snapshots.data() + begin,
                                   static_cast<std::size_t>(target - begin));
  TargetCtx ctx;
  ctx.fused = std::make_shared<const TemporalGraph>(
      TemporalGraph::fuse(window, static_cast<double>(target), cfg_.symmetrize));
  ctx.prep = model_->prepare(ctx.fused);
  ctx.positives = positives_of(target);
  return window_cache_.emplace(target, std::move(ctx)).first->second;
}

const models::PreparedGraph& Trainer::window_for(int target) { return target_ctx(target).prep; }

std::vector<std::pair<std::int32_t, std::int32_t>> Trainer::positives_of(int target) const {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  const Snapshot& s = data_.snapshots[static_cast<std::size_t>(target)];
  out.reserve(static_cast<std::size_t>(s.num_edges()));
  for (const EdgeEvent& e : s.edges()) out.emplace_back(e.src, e.dst);
  return out;
}

std::vector<sampling::LabeledEdge> Trainer::labeled_targets(int epoch, int target) {
  const TargetCtx& ctx = target_ctx(target);
  std::vector<sampling::LabeledEdge> out;
  out.reserve(ctx.positives.size() * static_cast<std::size_t>(1 + cfg_.k_train));
  for (const auto& [s, d] : ctx.positives) out.push_back({s, d, 1.0});
  const std::uint64_t neg_seed = derive_seed(
      cfg_.seed, "train-negatives",
      {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(target)});
  sampling::NegativeSet negs =
      sampling::sample_negatives(ctx.positives, data_.num_nodes, cfg_.k_train, neg_seed);
  for (std::size_t p = 0; p < ctx.positives.size(); ++p) {
    for (std::int32_t d : negs.for_positive(p)) out.push_back({ctx.positives[p].first, d, 0.0});
  }
  return out;
}

double Trainer::step_full_graph(const TargetCtx& ctx,
                                std::span<const sampling::LabeledEdge> pairs, double lr,
                                int epoch, int target, bool training) {
  nn::Tape tape;
  Rng dropout_rng = Rng::stream(cfg_.seed, "dropout",
                                {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(target)});
  nn::NodeId h = model_->encode(tape, ctx.prep, {}, training, dropout_rng);
  std::vector<std::pair<std::int32_t, std::int32_t>> idx;
  std::vector<double> labels;
  idx.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const sampling::LabeledEdge& e : pairs) {
    idx.emplace_back(e.src, e.dst);
    labels.push_back(e.label);
  }
  nn::NodeId preds = model_->decode(tape, h, idx);
  nn::NodeId loss = tape.bce_mean(preds, std::move(labels));
  const double loss_value = tape.value(loss).at(0, 0);
  if (training) {
    tape.backward(loss);
    adam_.step(lr);
  }
  return loss_value;
}

double Trainer::step_batch(const TargetCtx& ctx, const sampling::Batch& batch, double lr,
                           int epoch, int target, std::int64_t batch_no) {
  auto local = std::make_shared<const TemporalGraph>(TemporalGraph::from_edges(
      static_cast<std::int32_t>(batch.local_to_global.size()), batch.sub_edges,
      batch.window_end, batch.window_begin, batch.window_count));
  models::PreparedGraph prep = model_->prepare_local(local, ctx.prep, batch.local_to_global);
  nn::Tape tape;
  Rng dropout_rng = Rng::stream(
      cfg_.seed, "dropout",
      {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(target),
       static_cast<std::uint64_t>(batch_no)});
  nn::NodeId h = model_->encode(tape, prep, batch.local_to_global, true, dropout_rng);
  nn::NodeId preds = model_->decode(tape, h, batch.edge_label_index);
  nn::NodeId loss = tape.bce_mean(preds, batch.edge_label);
  const double loss_value = tape.value(loss).at(0, 0);
  tape.backward(loss);
  adam_.step(lr);
  return loss_value;
}

EpochStats Trainer::run_epoch(int epoch, std::int64_t start_step, std::int64_t max_steps) {
  const double lr = nn::cosine_anneal_lr(cfg_.lr, std::min(epoch - 1, cfg_.t_max), cfg_.t_max);
  EpochStats stats;
  double loss_sum = 0.0, pair_count = 0.0;
  std::int64_t cursor = 0;

  for (int target : train_targets_) {
    if (max_steps >= 0 && stats.steps >= max_steps) break;
    if (positives_of(target).empty()) continue;  // nothing to predict in this frame
    if (!cfg_.minibatch) {
      if (cursor++ < start_step) continue;
      std::vector<sampling::LabeledEdge> pairs = labeled_targets(epoch, target);
      const double loss = step_full_graph(target_ctx(target), pairs, lr, epoch, target, true);
      loss_sum += loss * static_cast<double>(pairs.size());
      pair_count += static_cast<double>(pairs.size());
      ++stats.steps;
    } else {
      std::vector<sampling::LabeledEdge> pairs = labeled_targets(epoch, target);
      const TargetCtx& ctx = target_ctx(target);
      const std::uint64_t sample_seed = derive_seed(
          cfg_.seed, "sampling",
          {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(target)});
      std::vector<sampling::Batch> batches = sampling::link_neighbor_batches(
          *ctx.fused, pairs, cfg_.batch_size, cfg_.fanout, sample_seed);
      for (std::size_t b = 0; b < batches.size(); ++b) {
        if (max_steps >= 0 && stats.steps >= max_steps) break;
        if (cursor++ < start_step) continue;
        const double loss =
            step_batch(ctx, batches[b], lr, epoch, target, static_cast<std::int64_t>(b));
        loss_sum += loss * static_cast<double>(batches[b].edge_label.size());
        pair_count += static_cast<double>(batches[b].edge_label.size());
        ++stats.steps;
      }
    }
  }
  stats.loss = pair_count > 0.0 ? loss_sum / pair_count : 0.0;
  return stats;
}

Trainer::EvalStats Trainer::evaluate(Split split) {
  const std::vector<int>& targets = split == Split::Val ? val_targets_ : test_targets_;
  double rr_sum = 0.0, loss_sum = 0.0;
  std::int64_t num_pos = 0, num_pairs = 0;

  for (int target : targets) {
    TargetCtx& ctx = target_ctx(target);
    const std::vector<std::int32_t>* negs = data_.eval_negs.find(target);
    if (negs == nullptr)
      throw DataError("evaluate: no pre-generated negatives for snapshot " +
                      std::to_string(target) + "; re-run ingest");
    const int k = data_.eval_negs.k;
    if (static_cast<std::size_t>(ctx.positives.size()) * k != negs->size())
      throw DataError("evaluate: negatives for snapshot " + std::to_string(target) +
                      " do not match the positive count");

    // embeddings once per target; the encode tape is released before scoring
    Mat h_value;
    {
      nn::Tape tape;
      Rng no_dropout(0);
      h_value = tape.value(model_->encode(tape, ctx.prep, {}, false, no_dropout));
    }

    // score in chunks of positives on short-lived decoder tapes
    const std::size_t chunk = std::max<std::size_t>(1, 65536 / static_cast<std::size_t>(k + 1));
    for (std::size_t lo = 0; lo < ctx.positives.size(); lo += chunk) {
      const std::size_t hi = std::min(ctx.positives.size(), lo + chunk);
      std::vector<std::pair<std::int32_t, std::int32_t>> idx;
      idx.reserve((hi - lo) * static_cast<std::size_t>(k + 1));
      for (std::size_t p = lo; p < hi; ++p) {
        idx.emplace_back(ctx.positives[p].first, ctx.positives[p].second);
        for (int j = 0; j < k; ++j)
          idx.emplace_back(ctx.positives[p].first, (*negs)[p * static_cast<std::size_t>(k) + j]);
      }
      nn::Tape tape;
      nn::NodeId preds = model_->decode(tape, tape.constant(h_value), idx);
      const Mat& scores = tape.value(preds);
      for (std::size_t p = lo; p < hi; ++p) {
        const std::size_t base = (p - lo) * static_cast<std::size_t>(k + 1);
        const double pos_score = scores.at(static_cast<int>(base), 0);
        std::span<const double> neg_scores(scores.data() + base + 1, static_cast<std::size_t>(k));
        rr_sum += reciprocal_rank(pos_score, neg_scores);
        ++num_pos;
        loss_sum += -std::log(std::max(pos_score, 1e-12));
        for (double s : neg_scores) loss_sum += -std::log(std::max(1.0 - s, 1e-12));
        num_pairs += k + 1;
      }
    }
  }
  EvalStats out;
  out.mrr = num_pos > 0 ? rr_sum / static_cast<double>(num_pos) : 0.0;
  out.loss = num_pairs > 0 ? loss_sum / static_cast<double>(num_pairs) : 0.0;
  return out;
}

nn::MatStore Trainer::save_state() {
  nn::MatStore store = nn::snapshot_params(adam_.params());
  const auto& params = adam_.params();
  auto& m = adam_.first_moments();
  auto& v = adam_.second_moments();
  for (std::size_t i = 0; i < params.size(); ++i) {
    store.put("adam.m." + params[i]->name, m[i]);
    store.put("adam.v." + params[i]->name, v[i]);
  }
  store.put_scalar("adam.t", static_cast<double>(adam_.step_count()));
  return store;
}

void Trainer::load_state(const nn::MatStore& store) {
  nn::restore_params(store, adam_.params());
  const auto& params = adam_.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_.first_moments()[i] = store.get("adam.m." + params[i]->name);
    adam_.second_moments()[i] = store.get("adam.v." + params[i]->name);
  }
  adam_.set_step_count(static_cast<std::int64_t>(store.get_scalar("adam.t")));
}

TrainResult Trainer::run(std::ostream* metrics, const std::string& ckpt_dir) {
  TrainResult result;
  EarlyStopper stopper(cfg_.patience);
  nn::MatStore best = nn::snapshot_params(adam_.params());

  auto emit = [&](const MetricsRecord& r) {
    result.records.push_back(r);
    if (metrics != nullptr) *metrics << format_record(r) << "\n";
  };

  for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
    memtrack::reset_peak();
    double t0 = now_seconds();
    EpochStats stats = run_epoch(epoch);
    const double train_seconds = now_seconds() - t0;
    if (!std::isfinite(stats.loss))
      throw DataError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
    emit({epoch, "train", stats.loss, 0.0, train_seconds,
          static_cast<double>(memtrack::peak_bytes()) / kBytesPerMb});

    t0 = now_seconds();
    EvalStats val = evaluate(Split::Val);
    emit({epoch, "val", val.loss, val.mrr, now_seconds() - t0,
          static_cast<double>(memtrack::peak_bytes()) / kBytesPerMb});

    if (stopper.observe(val.mrr, epoch)) best = nn::snapshot_params(adam_.params());
    if (!ckpt_dir.empty()) {
      save_state().save(ckpt_dir + "/state_last.bin");
      best.save(ckpt_dir + "/ckpt_best.bin");
    }
    if (stopper.should_stop()) break;
  }

  nn::restore_params(best, adam_.params());
  const double t0 = now_seconds();
  EvalStats test = evaluate(Split::Test);
  emit({stopper.best_epoch(), "test", test.loss, test.mrr, now_seconds() - t0,
        static_cast<double>(memtrack::peak_bytes()) / kBytesPerMb});

  result.best_val_mrr = stopper.best();
  result.best_epoch = stopper.best_epoch();
  result.test_mrr = test.mrr;
  result.best_params = std::move(best);
  return result;
}

}  // namespace tgfuse::train
