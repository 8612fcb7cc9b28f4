// synrl: train, fine-tune, and audit a tabular data synthesizer.
//
// Exit codes: 0 success, 1 unexpected error, 2 invalid config,
// 3 missing/unreadable file, 4 schema mismatch, 5 numeric failure.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "synrl/errors.hpp"
#include "synrl/pipeline.hpp"

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 unexpected error, 2 invalid config, "
    "3 missing/unreadable file, 4 schema mismatch, 5 numeric failure.";

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;  // -1 keeps the config's seed
  bool force = false;
};

synrl::PipelineConfig load_config(const GlobalArgs& args) {
  synrl::PipelineConfig config;
  if (!args.config_path.empty()) {
    config = synrl::PipelineConfig::load(args.config_path);
  }
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synrl — VAE synthesizer with data-value-driven RL fine-tuning"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Pipeline config JSON");
  app.add_option("--out", args.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--seed", args.seed, "Override the config seed");
  app.add_flag("--force", args.force, "Overwrite existing artifacts");

  app.add_subcommand("toygen", "Emit a reproducible toy clinical-trial table")
      ->fallthrough();
  app.add_subcommand("fit", "Train the VAE generator on a CSV")->fallthrough();
  app.add_subcommand("finetune", "RL fine-tune a fitted checkpoint")->fallthrough();
  app.add_subcommand("generate", "Sample synthetic rows from a checkpoint")
      ->fallthrough();
  app.add_subcommand("rank", "Score and rank conditionally generated records")
      ->fallthrough();
  app.add_subcommand("evaluate", "Utility/fidelity/privacy report for a synthetic CSV")
      ->fallthrough();
  app.add_subcommand("experiment", "Multi-seed base-VAE vs fine-tuned comparison")
      ->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const synrl::PipelineConfig config = load_config(args);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "toygen") {
      synrl::cmd_toygen(config, args.out_dir, args.force);
    } else if (sub == "fit") {
      synrl::cmd_fit(config, args.out_dir, args.force);
    } else if (sub == "finetune") {
      synrl::cmd_finetune(config, args.out_dir, args.force);
    } else if (sub == "generate") {
      synrl::cmd_generate(config, args.out_dir, args.force);
    } else if (sub == "rank") {
      synrl::cmd_rank(config, args.out_dir, args.force);
    } else if (sub == "evaluate") {
      synrl::cmd_evaluate(config, args.out_dir, args.force);
    } else if (sub == "experiment") {
      synrl::cmd_experiment(config, args.out_dir, args.force);
    }
    return 0;
  } catch (const synrl::ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const synrl::IoError& e) {
    std::cerr << "error[io]: " << e.what() << '\n';
    return 3;
  } catch (const synrl::SchemaError& e) {
    std::cerr << "error[schema]: " << e.what() << '\n';
    return 4;
  } catch (const synrl::DimensionError& e) {
    std::cerr << "error[schema]: " << e.what() << '\n';
    return 4;
  } catch (const synrl::NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
