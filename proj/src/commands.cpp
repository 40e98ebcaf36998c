#include "tgfuse/commands.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "tgfuse/bench.hpp"
#include "tgfuse/errors.hpp"
#include "tgfuse/verify.hpp"

namespace tgfuse::commands {

namespace fs = std::filesystem;

namespace {

struct SeedOutcome {
  std::uint64_t seed = 0;
  double val_mrr = 0.0;
  double test_mrr = 0.0;
  int best_epoch = 0;
};

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
  return {mean, std::sqrt(var)};
}

std::vector<Snapshot> build_snapshots(const ExperimentConfig& cfg, std::int32_t* num_nodes) {
  if (cfg.kind == DatasetKind::SyntheticHawkes) {
    *num_nodes = cfg.synth_nodes;
    return data::generate_synthetic_hawkes(cfg.synth_nodes, cfg.synth_base_pairs,
                                           cfg.synth_delta, cfg.num_steps, cfg.synth_seed);
  }
  data::RawEventLog log = data::parse_edge_list(cfg.path, cfg.format);
  *num_nodes = log.num_nodes;
  return data::bin_snapshots(log, cfg.num_steps, cfg.binning, cfg.time_mode);
}

SeedOutcome run_one_seed(const ExperimentConfig& cfg, const train::DatasetBundle& bundle,
                         models::Kind kind, bool minibatch, std::uint64_t seed) {
  train::RunConfig rc = cfg.run;
  rc.model = kind;
  rc.minibatch = minibatch;
  rc.seed = seed;

  const std::string model_name = models::kind_to_string(kind);
  const std::string seed_dir = cfg.out_dir + "/" + model_name + "_seed" + std::to_string(seed);
  fs::create_directories(seed_dir);
  std::ofstream metrics(cfg.out_dir + "/metrics_" + model_name + "_seed" + std::to_string(seed) +
                        ".log");

  train::Trainer trainer(rc, bundle);
  train::TrainResult res = trainer.run(&metrics, seed_dir);
  res.best_params.save(cfg.out_dir + "/ckpt_" + model_name + "_seed" + std::to_string(seed) +
                       ".bin");
  return {seed, res.best_val_mrr, res.test_mrr, res.best_epoch};
}

std::vector<SeedOutcome> run_seeds(const ExperimentConfig& cfg,
                                   const train::DatasetBundle& bundle, models::Kind kind,
                                   bool minibatch, std::ostream& os) {
  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  if (cfg.parallel_seeds && cfg.seeds.size() > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(cfg.seeds.size());
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          outcomes[i] = run_one_seed(cfg, bundle, kind, minibatch, cfg.seeds[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (std::thread& w : workers) w.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      outcomes[i] = run_one_seed(cfg, bundle, kind, minibatch, cfg.seeds[i]);
  }
  for (const SeedOutcome& o : outcomes) {
    os << "model=" << models::kind_to_string(kind) << " seed=" << o.seed
       << " best_epoch=" << o.best_epoch << " val_mrr100=" << o.val_mrr
       << " test_mrr100=" << o.test_mrr << "\n";
  }
  return outcomes;
}

std::string summarize(const ExperimentConfig& cfg, models::Kind kind,
                      const std::vector<SeedOutcome>& outcomes) {
  std::vector<double> test;
  for (const SeedOutcome& o : outcomes) test.push_back(o.test_mrr);
  const auto [mean, sd] = mean_std(test);
  std::ostringstream line;
  line << "summary model=" << models::kind_to_string(kind) << " seeds=" << outcomes.size()
       << " test_mrr100_mean=" << mean << " test_mrr100_std=" << sd;
  std::ofstream summary(cfg.out_dir + "/summary_" + models::kind_to_string(kind) + ".log");
  summary << line.str() << "\n";
  return line.str();
}

}  // namespace

int cmd_ingest(const ExperimentConfig& cfg, std::ostream& os) {
  const std::string dir = cfg.cache_dir();
  fs::create_directories(dir);
  const std::string manifest_path = dir + "/manifest.txt";
  const std::string fingerprint = cfg.dataset_fingerprint();

  if (fs::exists(manifest_path)) {
    KvConfig manifest = KvConfig::parse_file(manifest_path);
    if (manifest.get_or("manifest", "fingerprint", "") == fingerprint) {
      os << "cache up to date (" << manifest_path << ")\n";
      return kExitOk;
    }
  }

  std::int32_t num_nodes = 0;
  std::vector<Snapshot> snaps = build_snapshots(cfg, &num_nodes);
  if (static_cast<int>(snaps.size()) != cfg.split.total())
    throw DataError("ingest: split spec sums to " + std::to_string(cfg.split.total()) +
                    " steps but the dataset was binned into " + std::to_string(snaps.size()) +
                    "; fix [dataset] split or num_steps");
  data::time_split(snaps, cfg.split);  // validates counts

  std::int64_t num_events = 0;
  for (const Snapshot& s : snaps) num_events += s.num_edges();

  std::span<const Snapshot> eval_span(snaps.data() + cfg.split.train,
                                      static_cast<std::size_t>(cfg.split.val + cfg.split.test));
  data::EvalNegatives negs =
      data::pregenerate_eval_negatives(eval_span, num_nodes, cfg.run.k_eval, cfg.eval_neg_seed);

  data::save_snapshots(snaps, num_nodes, dir + "/snapshots.bin");
  data::save_negatives(negs, dir + "/negatives.bin");

  KvConfig manifest;
  manifest.set("manifest", "fingerprint", fingerprint);
  manifest.set("manifest", "dataset", cfg.name);
  manifest.set("manifest", "num_nodes", std::to_string(num_nodes));
  manifest.set("manifest", "num_events", std::to_string(num_events));
  manifest.set("manifest", "num_steps", std::to_string(snaps.size()));
  manifest.set("manifest", "split", std::to_string(cfg.split.train) + " " +
                                        std::to_string(cfg.split.val) + " " +
                                        std::to_string(cfg.split.test));
  manifest.set("manifest", "eval_neg_seed", std::to_string(cfg.eval_neg_seed));
  manifest.set("manifest", "k_eval", std::to_string(cfg.run.k_eval));
  std::ofstream mf(manifest_path);
  mf << manifest.serialize();

  os << "ingested dataset=" << cfg.name << " num_nodes=" << num_nodes
     << " num_events=" << num_events << " num_steps=" << snaps.size() << " cache=" << dir << "\n";
  return kExitOk;
}

train::DatasetBundle load_bundle(const ExperimentConfig& cfg) {
  const std::string dir = cfg.cache_dir();
  const std::string manifest_path = dir + "/manifest.txt";
  if (!fs::exists(manifest_path))
    throw DataError("no cache at '" + dir + "'; run `tgfuse ingest --config <file>` first");
  KvConfig manifest = KvConfig::parse_file(manifest_path);
  if (manifest.get_or("manifest", "fingerprint", "") != cfg.dataset_fingerprint())
    throw DataError("cache at '" + dir +
                    "' was built from a different dataset config; re-run `tgfuse ingest`");
  train::DatasetBundle bundle;
  auto [snaps, num_nodes] = data::load_snapshots(dir + "/snapshots.bin");
  bundle.snapshots = std::move(snaps);
  bundle.num_nodes = num_nodes;
  bundle.split = cfg.split;
  bundle.eval_negs = data::load_negatives(dir + "/negatives.bin");
  return bundle;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& model_override,
              bool minibatch_override, std::ostream& os) {
  train::DatasetBundle bundle = load_bundle(cfg);
  fs::create_directories(cfg.out_dir);
  const models::Kind kind =
      model_override.empty() ? cfg.run.model : models::kind_from_string(model_override);
  const bool minibatch = minibatch_override || cfg.run.minibatch;
  std::vector<SeedOutcome> outcomes = run_seeds(cfg, bundle, kind, minibatch, os);
  os << summarize(cfg, kind, outcomes) << "\n";
  return kExitOk;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint, std::ostream& os) {
  train::DatasetBundle bundle = load_bundle(cfg);
  train::RunConfig rc = cfg.run;
  rc.seed = cfg.seeds.front();
  train::Trainer trainer(rc, bundle);
  nn::MatStore store = nn::MatStore::load(checkpoint);
  nn::restore_params(store, trainer.model().parameters());
  const auto val = trainer.evaluate(train::Split::Val);
  const auto test = trainer.evaluate(train::Split::Test);
  os << "checkpoint=" << checkpoint << " val_mrr100=" << val.mrr << " test_mrr100=" << test.mrr
     << "\n";
  return kExitOk;
}

int cmd_ablate(const ExperimentConfig& cfg, std::ostream& os) {
  train::DatasetBundle bundle = load_bundle(cfg);
  fs::create_directories(cfg.out_dir);

  std::vector<SeedOutcome> plain = run_seeds(cfg, bundle, models::Kind::Gat, cfg.run.minibatch, os);
  std::vector<SeedOutcome> hawkes =
      run_seeds(cfg, bundle, models::Kind::HawkesGat, cfg.run.minibatch, os);
  os << summarize(cfg, models::Kind::Gat, plain) << "\n";
  os << summarize(cfg, models::Kind::HawkesGat, hawkes) << "\n";

  std::vector<double> p, h;
  for (const SeedOutcome& o : plain) p.push_back(o.test_mrr);
  for (const SeedOutcome& o : hawkes) h.push_back(o.test_mrr);
  const double p_mean = mean_std(p).first;
  const double h_mean = mean_std(h).first;
  os << "ablation gat_mean=" << p_mean << " hawkes_gat_mean=" << h_mean
     << " improvement=" << (p_mean > 0.0 ? h_mean / p_mean : 0.0) << "\n";
  return kExitOk;
}

int cmd_verify(std::ostream& os) {
  std::vector<verify::CheckResult> results = verify::run_all();
  return verify::print_report(results, os) ? kExitOk : kExitVerify;
}

int cmd_bench(const KvConfig* kv, std::ostream& os) {
  bench::BenchConfig bc;
  if (kv != nullptr) {
    auto get_i64 = [&](const char* key, std::int64_t fallback) {
      return kv->has("bench", key) ? std::stoll(kv->get("bench", key)) : fallback;
    };
    bc.stream_nodes = static_cast<std::int32_t>(get_i64("stream_nodes", bc.stream_nodes));
    bc.stream_edges_per_snapshot =
        get_i64("stream_edges_per_snapshot", bc.stream_edges_per_snapshot);
    bc.mem_nodes = static_cast<std::int32_t>(get_i64("mem_nodes", bc.mem_nodes));
    bc.mem_edges_per_snapshot = get_i64("mem_edges_per_snapshot", bc.mem_edges_per_snapshot);
    bc.mem_window = static_cast<int>(get_i64("mem_window", bc.mem_window));
    bc.mem_hidden = static_cast<int>(get_i64("mem_hidden", bc.mem_hidden));
    bc.mem_batch_size = get_i64("mem_batch_size", bc.mem_batch_size);
    bc.mem_positive_cap = get_i64("mem_positive_cap", bc.mem_positive_cap);
    bc.kernel_rows = get_i64("kernel_rows", bc.kernel_rows);
    bc.kernel_dim = static_cast<int>(get_i64("kernel_dim", bc.kernel_dim));
    if (kv->has("bench", "windows")) {
      bc.windows.clear();
      std::istringstream ws(kv->get("bench", "windows"));
      int w;
      while (ws >> w) bc.windows.push_back(w);
    }
  }
  bench::Report report = bench::run(bc);
  bench::print_table(report, os);
  if (!report.fuse_scaling_ok || !report.minibatch_memory_ok) {
    os << "bench: directional checks failed (fuse_linear="
       << (report.fuse_scaling_ok ? 1 : 0) << ", mini_lt_full="
       << (report.minibatch_memory_ok ? 1 : 0) << ")\n";
    return kExitVerify;
  }
  return kExitOk;
}

}  // namespace tgfuse::commands
