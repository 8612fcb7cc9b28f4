#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "synrl/errors.hpp"
#include "synrl/metrics.hpp"
#include "synrl/rng.hpp"
#include "synrl/toygen.hpp"

using namespace synrl;

namespace {

double brute_force_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        if (s[i] > s[j]) num += 1.0;
        else if (s[i] == s[j]) num += 0.5;
      }
    }
  }
  return num / pairs;
}

}  // namespace

TEST_CASE("rank AUROC equals brute-force pair counting, ties included") {
  Rng rng(17);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = 4 + rng.below(40);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng.below(6));  // coarse grid forces ties
      y[i] = int(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;  // both classes present
    CHECK(auroc(s, y) == doctest::Approx(brute_force_auroc(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("AUROC endpoints and error cases") {
  CHECK(auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(auroc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
  CHECK(auroc({0.5, 0.5}, {0, 1}) == 0.5);
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {1, 1}), ConfigError);
}

TEST_CASE("KS statistic endpoints") {
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_statistic({1, 2, 3}, {10, 11}) == 1.0);
  const double mid = ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6});
  CHECK(mid == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_statistic({}, {1.0}), ConfigError);
}

TEST_CASE("KS p-value decreases in the statistic and is calibrated at 0") {
  CHECK(ks_pvalue(0.0, 100, 100) == 1.0);
  const double p1 = ks_pvalue(0.1, 100, 100);
  const double p2 = ks_pvalue(0.3, 100, 100);
  const double p3 = ks_pvalue(0.6, 100, 100);
  CHECK(p1 > p2);
  CHECK(p2 > p3);
  CHECK(p3 < 0.001);
  CHECK(p1 <= 1.0);
}

TEST_CASE("fidelity metrics hit their identities when synthetic = real") {
  ToyTrialSpec spec;
  spec.n_patients = 300;
  spec.seed = 21;
  const Dataset real = generate_toy_trial(spec);
  const Dataset copy = real;

  CHECK(column_shapes(real, copy) == 1.0);
  CHECK(ks_dissimilar_pct(real, copy) == 0.0);
  CHECK(column_pair_trends(real, copy) >= 1.0 - 1e-12);
  // An exact copy gives every point a zero-distance twin in the other set,
  // so the mean silhouette is exactly -1/n: at or below the noise floor.
  CHECK(silhouette(real, copy) <= 1e-6);
  CHECK(silhouette(real, copy) == doctest::Approx(-1.0 / 300.0).epsilon(1e-9));
}

TEST_CASE("adversarial accuracy endpoints") {
  EncodedMatrix a;
  a.n_rows = 4;
  a.width = 1;
  a.values = {0.0, 1.0, 2.0, 3.0};
  SUBCASE("identical sets are fully memorized: AA = 0") {
    CHECK(adversarial_accuracy(a, a) == 0.0);
  }
  SUBCASE("far-separated sets are fully distinguishable: AA = 1") {
    EncodedMatrix b = a;
    for (double& v : b.values) v += 100.0;
    CHECK(adversarial_accuracy(a, b) == 1.0);
  }
  SUBCASE("tiny sets are rejected") {
    EncodedMatrix one;
    one.n_rows = 1;
    one.width = 1;
    one.values = {0.0};
    CHECK_THROWS_AS(adversarial_accuracy(a, one), ConfigError);
  }
}

TEST_CASE("memorized synthetic data shows privacy loss and inference risk") {
  ToyTrialSpec spec;
  spec.n_patients = 300;
  spec.seed = 22;
  const Dataset all = generate_toy_trial(spec);
  const auto [train, test] = split(all, 0.5, 0);
  const Dataset leaked = train;  // generator that memorized its input

  const auto [signed_loss, abs_loss] = privacy_loss(train, test, leaked, 1);
  CHECK(signed_loss > 0.3);  // test rows look far less "close" than train rows
  CHECK(abs_loss == std::abs(signed_loss));

  const double risk = mean_inference_risk(train, test, leaked, 100, 1);
  CHECK(risk > 0.7);

  // an honest synthetic sample of the same process carries far less risk
  ToyTrialSpec fresh = spec;
  fresh.seed = 77;
  Dataset independent = generate_toy_trial(fresh);
  independent.rows.resize(train.n_rows());
  const auto [ind_loss, ind_abs] = privacy_loss(train, test, independent, 1);
  CHECK(std::abs(ind_loss) < 0.15);
  CHECK(mean_inference_risk(train, test, independent, 100, 1) < risk);
}

TEST_CASE("depth-0 ml_efficiency regression collapses to label variance") {
  // Constant-prediction forest: fold MSE = Var(fold labels) + (bias)^2.
  // With one fold and a synthetic training set whose label mean matches the
  // real mean, the bias vanishes and MSE equals the population variance.
  TableSchema schema;
  schema.columns = {{"x", ColumnKind::Continuous, {}, TargetRole::Feature},
                    {"y", ColumnKind::Continuous, {}, TargetRole::Target}};
  Dataset real{schema, {}};
  Dataset synthetic{schema, {}};
  Rng rng(5);
  double mean = 0.0;
  for (int i = 0; i < 40; ++i) {
    real.rows.push_back({rng.normal(), double(i)});
    mean += double(i) / 40.0;
  }
  for (int i = 0; i < 25; ++i) synthetic.rows.push_back({rng.normal(), mean});

  ForestConfig forest;
  forest.max_depth = 0;
  forest.n_trees = 1;
  forest.bootstrap = false;
  const UtilityBlock u = ml_efficiency(synthetic, real, "y",
                                       ForestTask::Regression, forest, 1, 0);
  double var = 0.0;
  for (const auto& row : real.rows) var += (row[1] - mean) * (row[1] - mean) / 40.0;
  CHECK(u.metric == "MSE");
  CHECK(u.mean == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("single-class AUROC folds are skipped and counted") {
  const Dataset d = testutil::tiny_dataset();
  Dataset real = d;
  // 8 rows, 8 folds: every fold holds one row, hence one class
  ForestConfig forest;
  forest.n_trees = 2;
  CHECK_THROWS_AS(ml_efficiency(d, real, "outcome", ForestTask::Classification,
                                forest, 8, 0),
                  ConfigError);  // every fold skipped
}

TEST_CASE("metric report json round trip is exact") {
  MetricReport r;
  r.utility = {"AUROC", 0.8125, 0.03, {0.8, 0.825}, 1};
  r.fidelity = {0.01, 12.5, 0.97, 0.93};
  r.privacy = {0.05, -0.02, 0.02};
  r.provenance = {"real.csv", "syn.csv", "ckpt.json", 42, "deadbeef"};
  const std::string text = report_to_json(r);
  CHECK(report_to_json(report_from_json(text)) == text);
}

TEST_CASE("report and correlation csv exports") {
  testutil::TempDir tmp("rep");
  MetricReport r;
  r.utility.metric = "AUROC";
  save_report_csv(r, tmp.file("r.csv"));
  const std::string text = testutil::slurp(tmp.file("r.csv"));
  CHECK(text.find("metric,value\n") == 0);
  CHECK(text.find("utility_AUROC_mean,0") != std::string::npos);

  save_correlation_csv(testutil::tiny_dataset(), tmp.file("c.csv"));
  const std::string corr = testutil::slurp(tmp.file("c.csv"));
  CHECK(corr.find("column,age,bp,flag,outcome") == 0);
}

TEST_CASE("evaluate_all rejects an empty synthetic dataset") {
  const Dataset d = testutil::tiny_dataset();
  Dataset empty{d.schema, {}};
  CHECK_THROWS_AS(evaluate_all(d, d, empty, "outcome",
                               ForestTask::Classification, {}),
                  ConfigError);
}
