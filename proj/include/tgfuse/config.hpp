#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tgfuse/datasets.hpp"
#include "tgfuse/train.hpp"

namespace tgfuse {

// Flat key-value config with [section] headers. Values are free text up to
// end of line; '#' starts a comment. Serialization is canonical (sorted
// sections and keys), so parse(serialize(parse(f))) == parse(f).
class KvConfig {
 public:
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  std::string serialize() const;
  bool operator==(const KvConfig& other) const { return sections_ == other.sections_; }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class DatasetKind { File, SyntheticHawkes };

// Typed view of an experiment config file.
struct ExperimentConfig {
  // [dataset]
  DatasetKind kind = DatasetKind::File;
  std::string name = "dataset";
  std::string path;
  data::EdgeFormat format = data::EdgeFormat::Auto;
  data::BinMode binning = data::BinMode::EqualDuration;
  data::TimeMode time_mode = data::TimeMode::Rescaled;
  int num_steps = 0;
  data::SplitSpec split;
  std::uint64_t eval_neg_seed = 900;
  // synthetic source parameters
  std::int32_t synth_nodes = 200;
  int synth_base_pairs = 600;
  double synth_delta = 0.5;
  std::uint64_t synth_seed = 7;

  // [model] + [train]
  train::RunConfig run;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool parallel_seeds = false;

  // [output]
  std::string out_dir = "runs/out";

  static ExperimentConfig from_kv(const KvConfig& kv);
  static ExperimentConfig from_file(const std::string& path);
  KvConfig to_kv() const;

  // Cache directory: $TGFUSE_CACHE_DIR when set, else <out_dir>/cache.
  std::string cache_dir() const;
  // Hash of the dataset-relevant settings; a matching manifest makes ingest
  // a no-op.
  std::string dataset_fingerprint() const;
};

}  // namespace tgfuse
