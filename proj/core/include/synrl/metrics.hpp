#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synrl/encoder.hpp"
#include "synrl/forest.hpp"
#include "synrl/schema.hpp"

namespace synrl {

struct UtilityBlock {
  std::string metric;  // "AUROC" or "MSE"
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<double> per_fold;
  std::size_t skipped_folds = 0;  // single-class AUROC folds
};

struct FidelityBlock {
  double silhouette = 0.0;
  double pct_dissimilar_columns = 0.0;  // 0..100
  double column_shapes = 0.0;           // 0..1
  double column_pair_trends = 0.0;      // 0..1
};

struct PrivacyBlock {
  double mean_inference_risk = 0.0;
  double privacy_loss_signed = 0.0;
  double privacy_loss_absolute = 0.0;
};

struct Provenance {
  std::string real_dataset_id;
  std::string synthetic_dataset_id;
  std::string generator_id;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct MetricReport {
  UtilityBlock utility;
  FidelityBlock fidelity;
  PrivacyBlock privacy;
  Provenance provenance;
};

struct EvalConfig {
  ForestConfig forest;
  std::size_t folds = 10;
  double ks_alpha = 0.05;
  std::size_t pair_trend_bins = 10;
  std::size_t inference_attacks_per_column = 200;
  double continuous_match_sigma = 0.5;
  std::uint64_t seed = 0;
};

/// Trains the forest on the entire synthetic dataset and scores each of the
/// `folds` held-out real folds (AUROC for classification, MSE regression).
/// real_reference_mode instead trains on the remaining real rows.
UtilityBlock ml_efficiency(const Dataset& synthetic, const Dataset& real,
                           const std::string& target, ForestTask task,
                           const ForestConfig& forest_config, std::size_t folds,
                           std::uint64_t seed, bool real_reference_mode = false);

/// Rank-based AUROC with tie-averaging; scores are the positive-class
/// probabilities, labels 0/1.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean silhouette coefficient of the real/synthetic two-cluster labeling in
/// encoded space; near 0 means the sets are indistinguishable.
double silhouette(const Dataset& real, const Dataset& synthetic);

/// Two-sample KS statistic between two samples.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic two-sample KS p-value with effective size n*m/(n+m).
double ks_pvalue(double d, std::size_t n, std::size_t m);

double ks_dissimilar_pct(const Dataset& real, const Dataset& synthetic,
                         double alpha = 0.05);

double column_shapes(const Dataset& real, const Dataset& synthetic);

double column_pair_trends(const Dataset& real, const Dataset& synthetic,
                          std::size_t bins = 10);

/// Nearest-neighbor adversarial accuracy between two encoded point sets;
/// 0.5 means indistinguishable.
double adversarial_accuracy(const EncodedMatrix& r, const EncodedMatrix& s);

/// (signed, absolute) privacy loss: AA(test, syn) - AA(train, syn). Larger
/// sets are subsampled by seed so all three have equal size.
std::pair<double, double> privacy_loss(const Dataset& train_real,
                                       const Dataset& test_real,
                                       const Dataset& synthetic,
                                       std::uint64_t seed);

/// Mean attribute-inference risk over columns, baselined against a control
/// set the generator never saw.
double mean_inference_risk(const Dataset& train_real, const Dataset& control_real,
                           const Dataset& synthetic,
                           std::size_t n_attacks_per_column, std::uint64_t seed,
                           double continuous_match_sigma = 0.5);

MetricReport evaluate_all(const Dataset& real_train, const Dataset& real_test,
                          const Dataset& synthetic, const std::string& target,
                          ForestTask task, const EvalConfig& config,
                          Provenance provenance = {});

std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& json_text);
void save_report_json(const MetricReport& report, const std::string& path);
void save_report_csv(const MetricReport& report, const std::string& path);

/// Pairwise Pearson correlation matrices behind the pair-trends score,
/// exported as CSV (continuous columns; header row and column).
void save_correlation_csv(const Dataset& data, const std::string& path);

}  // namespace synrl
