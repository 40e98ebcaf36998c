#pragma once

#include <string>

#include "tgfuse/config.hpp"
#include "tgfuse/train.hpp"

namespace tgfuse::commands {

// Exit codes shared with main(): 0 ok, 1 usage, 2 data, 3 verification.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitVerify = 3;

// Builds (or regenerates) the snapshot cache, evaluation negatives and
// manifest. A manifest whose fingerprint matches the config is left alone.
int cmd_ingest(const ExperimentConfig& cfg, std::ostream& os);

// Loads the cache into a training-ready bundle. Throws DataError with an
// instruction to run ingest when the cache is missing or stale.
train::DatasetBundle load_bundle(const ExperimentConfig& cfg);

// model_override: empty keeps the configured model. Returns per-seed test
// MRRs through the report stream and writes metrics/checkpoint files.
int cmd_train(const ExperimentConfig& cfg, const std::string& model_override,
              bool minibatch_override, std::ostream& os);

int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint, std::ostream& os);

// Runs the plain-GAT / Hawkes-GAT pair and prints the comparison.
int cmd_ablate(const ExperimentConfig& cfg, std::ostream& os);

int cmd_verify(std::ostream& os);

// kv carries an optional [bench] section with size overrides; null runs the
// default sizes.
int cmd_bench(const KvConfig* kv, std::ostream& os);

}  // namespace tgfuse::commands
