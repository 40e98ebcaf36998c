#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tgfuse/commands.hpp"
#include "tgfuse/errors.hpp"

using namespace tgfuse;

int main(int argc, char** argv) {
  CLI::App app{"tgfuse - temporal-graph fusion and Hawkes-GNN link prediction engine"};
  app.require_subcommand(1);

  std::string config_path, model_override, checkpoint;
  bool minibatch = false;

  CLI::App* ingest = app.add_subcommand("ingest", "build the snapshot/negatives cache");
  ingest->add_option("--config", config_path, "experiment config file")->required();

  CLI::App* train = app.add_subcommand("train", "train a model, one run per seed");
  train->add_option("--config", config_path, "experiment config file")->required();
  train->add_option("--model", model_override, "override [model] kind");
  train->add_flag("--minibatch", minibatch, "force mini-batch training");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
  eval->add_option("--config", config_path, "experiment config file")->required();
  eval->add_option("--checkpoint", checkpoint, "parameter checkpoint file")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "run the gat / hawkes-gat comparison");
  ablate->add_option("--config", config_path, "experiment config file")->required();

  app.add_subcommand("verify", "run the property-check suite");

  CLI::App* bench = app.add_subcommand("bench", "fuse/epoch timing, memory and kernel table");
  bench->add_option("--config", config_path, "config with an optional [bench] section");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? commands::kExitOk : commands::kExitUsage;
  }

  try {
    if (app.got_subcommand("verify")) return commands::cmd_verify(std::cout);
    if (app.got_subcommand("bench")) {
      if (config_path.empty()) return commands::cmd_bench(nullptr, std::cout);
      KvConfig kv = KvConfig::parse_file(config_path);
      return commands::cmd_bench(&kv, std::cout);
    }
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (app.got_subcommand(ingest)) return commands::cmd_ingest(cfg, std::cout);
    if (app.got_subcommand(train)) return commands::cmd_train(cfg, model_override, minibatch, std::cout);
    if (app.got_subcommand(eval)) return commands::cmd_eval(cfg, checkpoint, std::cout);
    if (app.got_subcommand(ablate)) return commands::cmd_ablate(cfg, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return commands::kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return commands::kExitData;
  } catch (const VerifyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return commands::kExitVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return commands::kExitData;
  }
  return commands::kExitUsage;
}
