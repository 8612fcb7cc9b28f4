#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synrl/forest.hpp"
#include "synrl/metrics.hpp"
#include "synrl/reward.hpp"
#include "synrl/rl.hpp"
#include "synrl/toygen.hpp"
#include "synrl/vae.hpp"
#include "synrl/valuation.hpp"

namespace synrl {

/// Everything a CLI run needs, loadable from one JSON file. Unknown fields
/// are rejected; absent fields keep their defaults.
struct PipelineConfig {
  // paths (relative paths resolve against the invoker's cwd)
  std::string data_csv;
  std::string schema_json;   // empty -> infer from the CSV
  std::string checkpoint;    // input model for finetune/generate/rank
  std::string synthetic_csv; // input for evaluate

  std::string target;                  // empty -> schema's Target column
  std::string task = "classification"; // or "regression"
  double train_fraction = 0.8;
  std::size_t generate_count = 400;
  std::size_t top_k = 0;  // 0 -> keep the full ranked batch
  double head_alpha = 0.0;  // > 0 adds the prediction-head baseline to fit
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> experiment_seeds = {0, 1, 2};

  VaeConfig vae;
  RlConfig rl;
  ValuationConfig valuation;
  RewardConfig reward;
  ForestConfig forest;
  EvalConfig eval;
  ToyTrialSpec toy;

  void validate() const;
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& json_text);
  static PipelineConfig load(const std::string& path);
};

/// FNV-1a 64-bit hash, hex-encoded; fingerprints configs in run manifests.
std::string fnv1a_hex(const std::string& text);

/// Each command writes its artifacts plus a run manifest (config hash, seed,
/// wall time, artifact list) inside `out_dir`, and refuses to overwrite an
/// existing artifact unless `force` is set.
void cmd_toygen(const PipelineConfig& config, const std::string& out_dir, bool force);
void cmd_fit(const PipelineConfig& config, const std::string& out_dir, bool force);
void cmd_finetune(const PipelineConfig& config, const std::string& out_dir, bool force);
void cmd_generate(const PipelineConfig& config, const std::string& out_dir, bool force);
void cmd_rank(const PipelineConfig& config, const std::string& out_dir, bool force);
MetricReport cmd_evaluate(const PipelineConfig& config, const std::string& out_dir,
                          bool force);
/// Per-seed subdirectories, each with base-VAE and fine-tuned reports, plus
/// a summary table comparing their utility and fidelity.
void cmd_experiment(const PipelineConfig& config, const std::string& out_dir,
                    bool force);

}  // namespace synrl
