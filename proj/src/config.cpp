#include "tgfuse/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tgfuse/errors.hpp"
#include "tgfuse/models.hpp"

namespace tgfuse {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw UsageError("config: [" + section + "] " + key + " = '" + v + "' is not an integer");
  }
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw UsageError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  }
}

std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw UsageError("config: [" + section + "] " + key + " = '" + v + "' is not an integer");
  }
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config: [" + section + "] " + key + " = '" + v + "' is not a boolean");
}

std::vector<std::string> split_ws(const std::string& v) {
  std::istringstream is(v);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str());
}

bool KvConfig::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) != 0;
}

std::string KvConfig::get(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || s->second.count(key) == 0)
    throw UsageError("config: missing [" + section + "] " + key);
  return s->second.at(key);
}

std::string KvConfig::get_or(const std::string& section, const std::string& key,
                             const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

void KvConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

std::string KvConfig::serialize() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [section, kv] : sections_) {
    if (!first) os << "\n";
    first = false;
    os << "[" << section << "]\n";
    for (const auto& [key, value] : kv) os << key << " = " << value << "\n";
  }
  return os.str();
}

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
  ExperimentConfig c;

  const std::string kind = kv.get_or("dataset", "kind", "file");
  if (kind == "file")
    c.kind = DatasetKind::File;
  else if (kind == "synthetic-hawkes")
    c.kind = DatasetKind::SyntheticHawkes;
  else
    throw UsageError("config: [dataset] kind must be 'file' or 'synthetic-hawkes'");
  c.name = kv.get_or("dataset", "name", "dataset");
  c.path = kv.get_or("dataset", "path", "");
  const std::string fmt = kv.get_or("dataset", "format", "auto");
  if (fmt == "auto")
    c.format = data::EdgeFormat::Auto;
  else if (fmt == "src-dst-time")
    c.format = data::EdgeFormat::SrcDstTime;
  else if (fmt == "src-dst-weight-time")
    c.format = data::EdgeFormat::SrcDstWeightTime;
  else
    throw UsageError("config: [dataset] format '" + fmt + "' unknown");
  const std::string binning = kv.get_or("dataset", "binning", "equal-duration");
  if (binning == "equal-duration")
    c.binning = data::BinMode::EqualDuration;
  else if (binning == "equal-count")
    c.binning = data::BinMode::EqualCount;
  else
    throw UsageError("config: [dataset] binning '" + binning + "' unknown");
  const std::string tm = kv.get_or("dataset", "time_mode", "rescaled");
  if (tm == "rescaled")
    c.time_mode = data::TimeMode::Rescaled;
  else if (tm == "index")
    c.time_mode = data::TimeMode::Index;
  else
    throw UsageError("config: [dataset] time_mode '" + tm + "' unknown");
  c.num_steps = to_int("dataset", "num_steps", kv.get_or("dataset", "num_steps", "0"));
  if (kv.has("dataset", "split")) {
    auto parts = split_ws(kv.get("dataset", "split"));
    if (parts.size() != 3)
      throw UsageError("config: [dataset] split needs three counts (train val test)");
    c.split.train = to_int("dataset", "split", parts[0]);
    c.split.val = to_int("dataset", "split", parts[1]);
    c.split.test = to_int("dataset", "split", parts[2]);
  }
  c.eval_neg_seed = to_u64("dataset", "eval_neg_seed", kv.get_or("dataset", "eval_neg_seed", "900"));
  c.synth_nodes = to_int("dataset", "synth_nodes", kv.get_or("dataset", "synth_nodes", "200"));
  c.synth_base_pairs =
      to_int("dataset", "synth_base_pairs", kv.get_or("dataset", "synth_base_pairs", "600"));
  c.synth_delta = to_double("dataset", "synth_delta", kv.get_or("dataset", "synth_delta", "0.5"));
  c.synth_seed = to_u64("dataset", "synth_seed", kv.get_or("dataset", "synth_seed", "7"));

  c.run.model = models::kind_from_string(kv.get_or("model", "kind", "hawkes-gat"));
  c.run.hidden = to_int("model", "hidden", kv.get_or("model", "hidden", "64"));
  c.run.layers = to_int("model", "layers", kv.get_or("model", "layers", "2"));
  c.run.feature_dim = to_int("model", "feature_dim", kv.get_or("model", "feature_dim", "64"));
  c.run.dropout = to_double("model", "dropout", kv.get_or("model", "dropout", "0.1"));
  c.run.use_bn = to_bool("model", "use_bn", kv.get_or("model", "use_bn", "false"));

  const std::string mode = kv.get_or("train", "mode", "full");
  if (mode == "full")
    c.run.minibatch = false;
  else if (mode == "mini")
    c.run.minibatch = true;
  else
    throw UsageError("config: [train] mode must be 'full' or 'mini'");
  c.run.window = to_int("train", "window", kv.get_or("train", "window", "9"));
  c.run.lr = to_double("train", "lr", kv.get_or("train", "lr", "0.001"));
  c.run.t_max = to_int("train", "t_max", kv.get_or("train", "t_max", "100"));
  c.run.max_epochs = to_int("train", "max_epochs", kv.get_or("train", "max_epochs", "200"));
  c.run.patience = to_int("train", "patience", kv.get_or("train", "patience", "20"));
  c.run.k_train = to_int("train", "k_train", kv.get_or("train", "k_train", "1"));
  c.run.k_eval = to_int("train", "k_eval", kv.get_or("train", "k_eval", "100"));
  c.run.batch_size = to_int("train", "batch_size", kv.get_or("train", "batch_size", "1024"));
  c.run.symmetrize = to_bool("train", "symmetrize", kv.get_or("train", "symmetrize", "true"));
  c.run.skip_short_windows =
      to_bool("train", "skip_short_windows", kv.get_or("train", "skip_short_windows", "false"));
  c.run.fanout.clear();
  for (const std::string& f : split_ws(kv.get_or("train", "fanout", "-1")))
    c.run.fanout.push_back(to_int("train", "fanout", f));
  c.seeds.clear();
  for (const std::string& s : split_ws(kv.get_or("train", "seeds", "1 2 3")))
    c.seeds.push_back(to_u64("train", "seeds", s));
  if (c.seeds.empty()) throw UsageError("config: [train] seeds must not be empty");
  c.parallel_seeds =
      to_bool("train", "parallel_seeds", kv.get_or("train", "parallel_seeds", "false"));

  c.out_dir = kv.get_or("output", "dir", "runs/out");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KvConfig::parse_file(path));
}

KvConfig ExperimentConfig::to_kv() const {
  KvConfig kv;
  kv.set("dataset", "kind", kind == DatasetKind::File ? "file" : "synthetic-hawkes");
  kv.set("dataset", "name", name);
  kv.set("dataset", "path", path);
  kv.set("dataset", "format",
         format == data::EdgeFormat::Auto
             ? "auto"
             : (format == data::EdgeFormat::SrcDstTime ? "src-dst-time" : "src-dst-weight-time"));
  kv.set("dataset", "binning",
         binning == data::BinMode::EqualDuration ? "equal-duration" : "equal-count");
  kv.set("dataset", "time_mode", time_mode == data::TimeMode::Rescaled ? "rescaled" : "index");
  kv.set("dataset", "num_steps", std::to_string(num_steps));
  kv.set("dataset", "split",
         std::to_string(split.train) + " " + std::to_string(split.val) + " " +
             std::to_string(split.test));
  kv.set("dataset", "eval_neg_seed", std::to_string(eval_neg_seed));
  kv.set("dataset", "synth_nodes", std::to_string(synth_nodes));
  kv.set("dataset", "synth_base_pairs", std::to_string(synth_base_pairs));
  {
    std::ostringstream os;
    os << synth_delta;
    kv.set("dataset", "synth_delta", os.str());
  }
  kv.set("dataset", "synth_seed", std::to_string(synth_seed));

  kv.set("model", "kind", models::kind_to_string(run.model));
  kv.set("model", "hidden", std::to_string(run.hidden));
  kv.set("model", "layers", std::to_string(run.layers));
  kv.set("model", "feature_dim", std::to_string(run.feature_dim));
  {
    std::ostringstream os;
    os << run.dropout;
    kv.set("model", "dropout", os.str());
  }
  kv.set("model", "use_bn", run.use_bn ? "true" : "false");

  kv.set("train", "mode", run.minibatch ? "mini" : "full");
  kv.set("train", "window", std::to_string(run.window));
  {
    std::ostringstream os;
    os << run.lr;
    kv.set("train", "lr", os.str());
  }
  kv.set("train", "t_max", std::to_string(run.t_max));
  kv.set("train", "max_epochs", std::to_string(run.max_epochs));
  kv.set("train", "patience", std::to_string(run.patience));
  kv.set("train", "k_train", std::to_string(run.k_train));
  kv.set("train", "k_eval", std::to_string(run.k_eval));
  kv.set("train", "batch_size", std::to_string(run.batch_size));
  kv.set("train", "symmetrize", run.symmetrize ? "true" : "false");
  kv.set("train", "skip_short_windows", run.skip_short_windows ? "true" : "false");
  {
    std::ostringstream os;
    for (std::size_t i = 0; i < run.fanout.size(); ++i) os << (i ? " " : "") << run.fanout[i];
    kv.set("train", "fanout", os.str());
  }
  {
    std::ostringstream os;
    for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? " " : "") << seeds[i];
    kv.set("train", "seeds", os.str());
  }
  kv.set("train", "parallel_seeds", parallel_seeds ? "true" : "false");
  kv.set("output", "dir", out_dir);
  return kv;
}

std::string ExperimentConfig::cache_dir() const {
  const char* env = std::getenv("TGFUSE_CACHE_DIR");
  if (env != nullptr && *env != '\0') return std::string(env) + "/" + name;
  return out_dir + "/cache/" + name;
}

std::string ExperimentConfig::dataset_fingerprint() const {
  std::ostringstream os;
  os << (kind == DatasetKind::File ? "file" : "synthetic") << "|" << name << "|" << path << "|"
     << static_cast<int>(format) << "|" << static_cast<int>(binning) << "|"
     << static_cast<int>(time_mode) << "|" << num_steps << "|" << split.train << "/" << split.val
     << "/" << split.test << "|" << eval_neg_seed << "|" << run.k_eval << "|" << synth_nodes << "|"
     << synth_base_pairs << "|" << synth_delta << "|" << synth_seed;
  if (kind == DatasetKind::File) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    os << "|size=" << (ec ? 0 : size);
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

}  // namespace tgfuse
