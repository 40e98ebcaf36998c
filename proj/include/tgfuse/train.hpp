#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tgfuse/checkpoint.hpp"
#include "tgfuse/datasets.hpp"
#include "tgfuse/models.hpp"
#include "tgfuse/optim.hpp"
#include "tgfuse/sampling.hpp"

namespace tgfuse::train {

struct RunConfig {
  models::Kind model = models::Kind::HawkesGat;
  int window = 9;  // input snapshots per target (window size 10 = 9 + 1 target)
  int hidden = 64;
  int layers = 2;
  int feature_dim = 64;
  double dropout = 0.1;
  double lr = 0.001;
  int patience = 20;
  int k_train = 1;
  int k_eval = 100;
  int t_max = 100;
  int max_epochs = 200;
  std::int64_t batch_size = 1024;
  std::vector<int> fanout{-1, -1};  // per hop; negative = unlimited
  std::uint64_t seed = 1;
  bool minibatch = false;
  bool use_bn = false;
  bool symmetrize = true;
  // Targets whose window would start before snapshot 0 train on the
  // truncated available history by default; set to skip them instead.
  bool skip_short_windows = false;

  void validate() const;
};

struct MetricsRecord {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double mrr100 = 0.0;  // 0 on train records (not evaluated there)
  double seconds = 0.0;
  double peak_mb = 0.0;
};

std::string format_record(const MetricsRecord& r);

struct DatasetBundle {
  std::vector<Snapshot> snapshots;
  std::int32_t num_nodes = 0;
  data::SplitSpec split;
  data::EvalNegatives eval_negs;  // covers val and test snapshots
};

struct TrainResult {
  double best_val_mrr = 0.0;
  int best_epoch = 0;
  double test_mrr = 0.0;
  std::vector<MetricsRecord> records;
  nn::MatStore best_params;
};

// Average of optimistic (1 + #strictly greater) and pessimistic
// (1 + #greater-or-equal) ranks, reciprocal.
double reciprocal_rank(double pos_score, std::span<const double> neg_scores);

// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when this epoch strictly improved the best value.
  bool observe(double value, int epoch);
  bool should_stop() const { return stale_ >= patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  double best_ = -1.0;
  int best_epoch_ = 0;
  int stale_ = 0;
};

enum class Split { Val, Test };

struct EpochStats {
  double loss = 0.0;       // pair-weighted mean BCE over the epoch
  std::int64_t steps = 0;  // optimizer steps taken
};

// Sliding-window trainer over a chronologically split snapshot sequence.
// One epoch visits every train-split target snapshot once, fuses its input
// window, and steps the optimizer per target (full-batch) or per sampled
// batch (mini-batch, one window at a time). All randomness is derived from
// cfg.seed through named streams keyed by (epoch, target, batch), so any
// prefix of the step sequence is exactly replayable.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, const DatasetBundle& data);

  // Full training loop: early stopping on validation MRR, best checkpoint
  // restored before the test evaluation. Writes one record per line to
  // metrics (when given); checkpoints per epoch under ckpt_dir (when given).
  TrainResult run(std::ostream* metrics, const std::string& ckpt_dir);

  // One training pass, optionally skipping the first start_step optimizer
  // steps or stopping after max_steps (for interrupt/resume).
  EpochStats run_epoch(int epoch, std::int64_t start_step = 0, std::int64_t max_steps = -1);

  struct EvalStats {
    double mrr = 0.0;
    double loss = 0.0;
  };
  EvalStats evaluate(Split split);

  models::Model& model() { return *model_; }
  nn::Adam& optimizer() { return adam_; }
  const std::vector<int>& train_targets() const { return train_targets_; }

  // Parameters plus optimizer moments and step counter; enough to resume at
  // any step boundary.
  nn::MatStore save_state();
  void load_state(const nn::MatStore& store);

  // Fused input window for a target snapshot (cached). Exposed for tests.
  const models::PreparedGraph& window_for(int target);
  std::vector<std::pair<std::int32_t, std::int32_t>> positives_of(int target) const;

 private:
  struct TargetCtx {
    std::shared_ptr<const TemporalGraph> fused;
    models::PreparedGraph prep;
    std::vector<std::pair<std::int32_t, std::int32_t>> positives;
  };
  TargetCtx& target_ctx(int target);
  std::vector<sampling::LabeledEdge> labeled_targets(int epoch, int target);
  double step_full_graph(const TargetCtx& ctx, std::span<const sampling::LabeledEdge> pairs,
                         double lr, int epoch, int target, bool training);
  double step_batch(const TargetCtx& ctx, const sampling::Batch& batch, double lr, int epoch,
                    int target, std::int64_t batch_no);

  RunConfig cfg_;
  const DatasetBundle& data_;
  std::unique_ptr<models::Model> model_;
  nn::Adam adam_;
  std::vector<int> train_targets_;
  std::vector<int> val_targets_, test_targets_;
  std::map<int, TargetCtx> window_cache_;
};

}  // namespace tgfuse::train
