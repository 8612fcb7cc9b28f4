#include "synrl/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synrl/csv.hpp"
#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace synrl {

namespace {

template <typename T>
void take(json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) {
    field = it->get<T>();
    j.erase(it);
  }
}

void reject_leftovers(const json& j, const std::string& where) {
  if (!j.empty()) {
    throw ConfigError("unknown config field in " + where + ": " +
                      j.begin().key());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
}

ForestTask parse_task(const std::string& task) {
  if (task == "classification") return ForestTask::Classification;
  if (task == "regression") return ForestTask::Regression;
  throw ConfigError("task must be 'classification' or 'regression'");
}

/// Scoped artifact sink: resolves names inside out_dir, enforces the
/// no-overwrite rule, and writes the run manifest on finish().
class Run {
 public:
  Run(std::string command, const PipelineConfig& config,
      const std::string& out_dir, bool force)
      : command_(std::move(command)),
        out_dir_(out_dir),
        force_(force),
        config_hash_(fnv1a_hex(config.to_json())),
        seed_(config.seed),
        started_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_dir_);
  }

  /// Claims an artifact path; throws unless absent or force is on.
  std::string path(const std::string& name) {
    const std::string p = (fs::path(out_dir_) / name).string();
    if (!force_ && fs::exists(p)) {
      throw IoError("refusing to overwrite " + p + " (pass --force)");
    }
    artifacts_.push_back(name);
    return p;
  }

  void finish() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_)
            .count();
    ordered_json j;
    j["command"] = command_;
    j["config_hash"] = config_hash_;
    j["seed"] = seed_;
    j["artifact_version"] = 1;
    j["wall_time_seconds"] = secs;
    j["artifacts"] = artifacts_;
    const std::string p = (fs::path(out_dir_) / "run_manifest.json").string();
    write_text(p, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string out_dir_;
  bool force_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
  std::chrono::steady_clock::time_point started_;
};

Dataset load_real(const PipelineConfig& config) {
  if (config.data_csv.empty()) throw ConfigError("data_csv is required");
  const TableSchema schema = config.schema_json.empty()
                                 ? infer_schema(config.data_csv)
                                 : load_schema(config.schema_json);
  return load_csv(config.data_csv, schema);
}

std::string resolve_target(const PipelineConfig& config, const TableSchema& schema) {
  if (!config.target.empty()) {
    schema.column_index(config.target);  // throws if absent
    return config.target;
  }
  if (const auto t = schema.target_index()) return schema.columns[*t].name;
  throw ConfigError("no target column: set 'target' or mark one in the schema");
}

struct SeedArtifacts {
  MetricReport base;
  MetricReport tuned;
};

SeedArtifacts run_experiment_seed(const PipelineConfig& config,
                                  std::uint64_t seed, const std::string& dir,
                                  bool force, Run& run,
                                  const std::string& subdir) {
  ToyTrialSpec toy = config.toy;
  toy.seed = seed;
  const Dataset data = generate_toy_trial(toy);
  const auto [train, test] = split(data, config.train_fraction, seed);

  VaeConfig vae = config.vae;
  vae.seed = seed;
  const GeneratorModel base = fit_vae(train, vae);

  RlConfig rl = config.rl;
  rl.seed = seed;
  const FinetuneResult tuned = finetune(base, train, test, config.valuation,
                                        config.reward, rl);

  const std::size_t n = config.generate_count > 0 ? config.generate_count
                                                  : train.n_rows();
  const Dataset syn_base = sample(base, n, Rng::mix(seed, 101));
  const Dataset syn_tuned = sample(tuned.model, n, Rng::mix(seed, 102));

  EvalConfig eval = config.eval;
  eval.seed = seed;
  eval.forest = config.forest;
  const std::string target = resolve_target(config, data.schema);
  const ForestTask task = parse_task(config.task);

  SeedArtifacts out;
  out.base = evaluate_all(train, test, syn_base, target, task, eval,
                          {"toy_trial", "base_vae", "base_vae", seed, ""});
  out.tuned = evaluate_all(train, test, syn_tuned, target, task, eval,
                           {"toy_trial", "synrl", "synrl", seed, ""});

  fs::create_directories(dir);
  auto art = [&](const std::string& name) {
    return run.path(subdir + "/" + name);
  };
  (void)force;
  save_csv(data, art("toy.csv"));
  save_checkpoint(base, art("base_checkpoint.json"));
  save_checkpoint(tuned.model, art("synrl_checkpoint.json"));
  save_finetune_csv(tuned.log, art("finetune_log.csv"));
  save_csv(syn_base, art("synthetic_base.csv"));
  save_csv(syn_tuned, art("synthetic_synrl.csv"));
  save_report_json(out.base, art("report_base.json"));
  save_report_json(out.tuned, art("report_synrl.json"));
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  parse_task(task);
  if (head_alpha < 0.0) throw ConfigError("head_alpha must be >= 0");
  if (experiment_seeds.empty()) throw ConfigError("experiment_seeds is empty");
  vae.validate();
  rl.validate();
  valuation.validate();
  reward.validate();
  forest.validate();
}

std::string PipelineConfig::to_json() const {
  ordered_json j;
  j["data_csv"] = data_csv;
  j["schema_json"] = schema_json;
  j["checkpoint"] = checkpoint;
  j["synthetic_csv"] = synthetic_csv;
  j["target"] = target;
  j["task"] = task;
  j["train_fraction"] = train_fraction;
  j["generate_count"] = generate_count;
  j["top_k"] = top_k;
  j["head_alpha"] = head_alpha;
  j["seed"] = seed;
  j["experiment_seeds"] = experiment_seeds;
  j["vae"] = {{"latent_dim", vae.latent_dim},
              {"encoder_hidden", vae.encoder_hidden},
              {"decoder_hidden", vae.decoder_hidden},
              {"epochs", vae.epochs},
              {"batch_size", vae.batch_size},
              {"learning_rate", vae.learning_rate},
              {"seed", vae.seed}};
  j["rl"] = {{"finetune_epochs", rl.finetune_epochs},
             {"batch_size", rl.batch_size},
             {"learning_rate", rl.learning_rate},
             {"clip_epsilon", rl.clip_epsilon},
             {"kl_coefficient", rl.kl_coefficient},
             {"samples_per_record", rl.samples_per_record},
             {"advantage_normalization", rl.advantage_normalization},
             {"seed", rl.seed}};
  j["valuation"] = {{"k_neighbors", valuation.k_neighbors},
                    {"continuous_target_bins", valuation.continuous_target_bins}};
  j["reward"] = {{"fidelity_weight", reward.fidelity_weight}};
  j["forest"] = {{"n_trees", forest.n_trees},
                 {"max_depth", forest.max_depth},
                 {"min_samples_split", forest.min_samples_split},
                 {"features_per_split", forest.features_per_split},
                 {"bootstrap", forest.bootstrap},
                 {"seed", forest.seed}};
  j["eval"] = {{"folds", eval.folds},
               {"ks_alpha", eval.ks_alpha},
               {"pair_trend_bins", eval.pair_trend_bins},
               {"inference_attacks_per_column", eval.inference_attacks_per_column},
               {"continuous_match_sigma", eval.continuous_match_sigma},
               {"seed", eval.seed}};
  j["toy"] = {{"n_patients", toy.n_patients},
              {"n_continuous", toy.n_continuous},
              {"n_binary_events", toy.n_binary_events},
              {"binary_target", toy.binary_target},
              {"target_coefficients", toy.target_coefficients},
              {"noise", toy.noise},
              {"seed", toy.seed}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  take(j, "data_csv", c.data_csv);
  take(j, "schema_json", c.schema_json);
  take(j, "checkpoint", c.checkpoint);
  take(j, "synthetic_csv", c.synthetic_csv);
  take(j, "target", c.target);
  take(j, "task", c.task);
  take(j, "train_fraction", c.train_fraction);
  take(j, "generate_count", c.generate_count);
  take(j, "top_k", c.top_k);
  take(j, "head_alpha", c.head_alpha);
  take(j, "seed", c.seed);
  take(j, "experiment_seeds", c.experiment_seeds);
  if (auto it = j.find("vae"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "latent_dim", c.vae.latent_dim);
    take(b, "encoder_hidden", c.vae.encoder_hidden);
    take(b, "decoder_hidden", c.vae.decoder_hidden);
    take(b, "epochs", c.vae.epochs);
    take(b, "batch_size", c.vae.batch_size);
    take(b, "learning_rate", c.vae.learning_rate);
    take(b, "seed", c.vae.seed);
    reject_leftovers(b, "vae");
  }
  if (auto it = j.find("rl"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "finetune_epochs", c.rl.finetune_epochs);
    take(b, "batch_size", c.rl.batch_size);
    take(b, "learning_rate", c.rl.learning_rate);
    take(b, "clip_epsilon", c.rl.clip_epsilon);
    take(b, "kl_coefficient", c.rl.kl_coefficient);
    take(b, "samples_per_record", c.rl.samples_per_record);
    take(b, "advantage_normalization", c.rl.advantage_normalization);
    take(b, "seed", c.rl.seed);
    reject_leftovers(b, "rl");
  }
  if (auto it = j.find("valuation"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "k_neighbors", c.valuation.k_neighbors);
    take(b, "continuous_target_bins", c.valuation.continuous_target_bins);
    reject_leftovers(b, "valuation");
  }
  if (auto it = j.find("reward"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "fidelity_weight", c.reward.fidelity_weight);
    reject_leftovers(b, "reward");
  }
  if (auto it = j.find("forest"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "n_trees", c.forest.n_trees);
    take(b, "max_depth", c.forest.max_depth);
    take(b, "min_samples_split", c.forest.min_samples_split);
    take(b, "features_per_split", c.forest.features_per_split);
    take(b, "bootstrap", c.forest.bootstrap);
    take(b, "seed", c.forest.seed);
    reject_leftovers(b, "forest");
  }
  if (auto it = j.find("eval"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "folds", c.eval.folds);
    take(b, "ks_alpha", c.eval.ks_alpha);
    take(b, "pair_trend_bins", c.eval.pair_trend_bins);
    take(b, "inference_attacks_per_column", c.eval.inference_attacks_per_column);
    take(b, "continuous_match_sigma", c.eval.continuous_match_sigma);
    take(b, "seed", c.eval.seed);
    reject_leftovers(b, "eval");
  }
  if (auto it = j.find("toy"); it != j.end()) {
    json b = std::move(*it);
    j.erase(it);
    take(b, "n_patients", c.toy.n_patients);
    take(b, "n_continuous", c.toy.n_continuous);
    take(b, "n_binary_events", c.toy.n_binary_events);
    take(b, "binary_target", c.toy.binary_target);
    take(b, "target_coefficients", c.toy.target_coefficients);
    take(b, "noise", c.toy.noise);
    take(b, "seed", c.toy.seed);
    reject_leftovers(b, "toy");
  }
  reject_leftovers(j, "config");
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  return from_json(read_text(path));
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void cmd_toygen(const PipelineConfig& config, const std::string& out_dir,
                bool force) {
  Run run("toygen", config, out_dir, force);
  ToyTrialSpec toy = config.toy;
  toy.seed = config.seed;
  const Dataset data = generate_toy_trial(toy);
  save_csv(data, run.path("toy.csv"));
  save_schema(data.schema, run.path("toy_schema.json"));
  run.finish();
}

void cmd_fit(const PipelineConfig& config, const std::string& out_dir, bool force) {
  Run run("fit", config, out_dir, force);
  const Dataset data = load_real(config);
  const auto [train, test] = split(data, config.train_fraction, config.seed);
  VaeConfig vae = config.vae;
  vae.seed = config.seed;

  GeneratorModel model;
  if (config.head_alpha > 0.0) {
    const std::string target = resolve_target(config, data.schema);
    model = fit_vae_with_prediction_head(train, target, config.head_alpha, vae);
  } else {
    model = fit_vae(train, vae);
  }
  save_checkpoint(model, run.path("checkpoint.json"));

  std::ofstream loss(run.path("loss_history.csv"));
  loss << "epoch,negative_elbo\n";
  char buf[40];
  for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", model.loss_history[e]);
    loss << e << ',' << buf << '\n';
  }
  run.finish();
}

void cmd_finetune(const PipelineConfig& config, const std::string& out_dir,
                  bool force) {
  Run run("finetune", config, out_dir, force);
  if (config.checkpoint.empty()) throw ConfigError("checkpoint is required");
  const GeneratorModel base = load_checkpoint(config.checkpoint);
  const Dataset data = load_real(config);
  const auto [train, test] = split(data, config.train_fraction, config.seed);
  RlConfig rl = config.rl;
  rl.seed = config.seed;
  const FinetuneResult result =
      finetune(base, train, test, config.valuation, config.reward, rl);
  save_checkpoint(result.model, run.path("checkpoint.json"));
  save_finetune_csv(result.log, run.path("finetune_log.csv"));
  run.finish();
}

void cmd_generate(const PipelineConfig& config, const std::string& out_dir,
                  bool force) {
  Run run("generate", config, out_dir, force);
  if (config.checkpoint.empty()) throw ConfigError("checkpoint is required");
  if (config.generate_count == 0) throw ConfigError("generate_count must be >= 1");
  const GeneratorModel model = load_checkpoint(config.checkpoint);
  const Dataset synthetic = sample(model, config.generate_count, config.seed);
  save_csv(synthetic, run.path("synthetic.csv"));
  run.finish();
}

void cmd_rank(const PipelineConfig& config, const std::string& out_dir, bool force) {
  Run run("rank", config, out_dir, force);
  if (config.checkpoint.empty()) throw ConfigError("checkpoint is required");
  const GeneratorModel model = load_checkpoint(config.checkpoint);
  const Dataset data = load_real(config);
  const auto [train, test] = split(data, config.train_fraction, config.seed);

  // One synthetic record per training record, conditionally regenerated.
  Rng rng(config.seed);
  Dataset synthetic{train.schema, {}};
  synthetic.rows.reserve(train.n_rows());
  for (const auto& row : train.rows) {
    synthetic.rows.push_back(conditional_generate(model, row, rng).x_hat);
  }

  const LabeledView syn_view =
      make_labeled_view(synthetic, model.enc, train, config.valuation);
  const LabeledView test_view =
      make_labeled_view(test, model.enc, train, config.valuation);
  const ValuationResult shapley = knn_shapley(syn_view, test_view, config.valuation);

  std::vector<double> fidelities(train.n_rows());
  for (std::size_t i = 0; i < train.n_rows(); ++i) {
    fidelities[i] = fidelity_l1(model.enc, train.rows[i], synthetic.rows[i]);
  }
  const RewardReport report =
      RewardReport::build(shapley.scores, fidelities, config.reward);
  save_reward_csv(report, run.path("rewards.csv"));

  std::vector<double> rewards;
  rewards.reserve(report.entries.size());
  for (const auto& e : report.entries) rewards.push_back(e.reward);
  const auto order = rank_batch(rewards);
  Dataset ranked{synthetic.schema, {}};
  for (auto i : order) ranked.rows.push_back(synthetic.rows[i]);
  save_csv(ranked, run.path("ranked.csv"));
  if (config.top_k > 0) {
    save_csv(select_top_k(synthetic, rewards, config.top_k), run.path("top_k.csv"));
  }
  run.finish();
}

MetricReport cmd_evaluate(const PipelineConfig& config, const std::string& out_dir,
                          bool force) {
  Run run("evaluate", config, out_dir, force);
  if (config.synthetic_csv.empty()) throw ConfigError("synthetic_csv is required");
  const Dataset data = load_real(config);
  const auto [train, test] = split(data, config.train_fraction, config.seed);
  const Dataset synthetic = load_csv(config.synthetic_csv, data.schema);

  EvalConfig eval = config.eval;
  eval.seed = config.seed;
  eval.forest = config.forest;
  const std::string target = resolve_target(config, data.schema);
  const MetricReport report = evaluate_all(
      train, test, synthetic, target, parse_task(config.task), eval,
      {config.data_csv, config.synthetic_csv, config.checkpoint, config.seed,
       fnv1a_hex(config.to_json())});
  save_report_json(report, run.path("report.json"));
  save_report_csv(report, run.path("report.csv"));
  save_correlation_csv(data, run.path("correlation_real.csv"));
  save_correlation_csv(synthetic, run.path("correlation_synthetic.csv"));
  run.finish();
  return report;
}

void cmd_experiment(const PipelineConfig& config, const std::string& out_dir,
                    bool force) {
  Run run("experiment", config, out_dir, force);
  std::ofstream summary(run.path("summary.csv"));
  summary << "seed,base_utility,synrl_utility,base_column_shapes,"
             "synrl_column_shapes,base_pair_trends,synrl_pair_trends,"
             "base_privacy_loss,synrl_privacy_loss\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    summary << ',' << buf;
  };
  for (const std::uint64_t seed : config.experiment_seeds) {
    const std::string subdir = "seed_" + std::to_string(seed);
    const SeedArtifacts a = run_experiment_seed(
        config, seed, (fs::path(out_dir) / subdir).string(), force, run, subdir);
    summary << seed;
    put(a.base.utility.mean);
    put(a.tuned.utility.mean);
    put(a.base.fidelity.column_shapes);
    put(a.tuned.fidelity.column_shapes);
    put(a.base.fidelity.column_pair_trends);
    put(a.tuned.fidelity.column_pair_trends);
    put(a.base.privacy.privacy_loss_signed);
    put(a.tuned.privacy.privacy_loss_signed);
    summary << '\n';
  }
  run.finish();
}

}  // namespace synrl
