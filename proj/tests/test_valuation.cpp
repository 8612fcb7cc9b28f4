#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "synrl/errors.hpp"
#include "synrl/rng.hpp"
#include "synrl/valuation.hpp"

using namespace synrl;

namespace {

LabeledView random_view(Rng& rng, std::size_t n, std::size_t dim) {
  LabeledView v;
  v.n = n;
  v.width = dim;
  v.features.resize(n * dim);
  v.labels.resize(n);
  for (double& f : v.features) f = rng.uniform(-2.0, 2.0);
  for (int& l : v.labels) l = int(rng.below(2));
  return v;
}

}  // namespace

TEST_CASE("closed-form KNN Shapley equals exact subset enumeration") {
  Rng rng(2024);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = 2 + rng.below(7);   // <= 8 train points
    const std::size_t m = 1 + rng.below(4);   // <= 4 test points
    ValuationConfig cfg;
    cfg.k_neighbors = 1 + rng.below(3);
    const LabeledView train = random_view(rng, n, 2);
    const LabeledView test = random_view(rng, m, 2);

    const ValuationResult fast = knn_shapley(train, test, cfg);
    const ValuationResult slow = exact_shapley(train, test, cfg);
    REQUIRE(fast.scores.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(fast.scores[i] - slow.scores[i]) < 1e-9);
    }
  }
}

TEST_CASE("Shapley efficiency: scores sum to the grand-coalition value") {
  Rng rng(55);
  for (int inst = 0; inst < 10; ++inst) {
    ValuationConfig cfg;
    cfg.k_neighbors = 1 + rng.below(3);
    const LabeledView train = random_view(rng, 6, 3);
    const LabeledView test = random_view(rng, 3, 3);
    const ValuationResult r = knn_shapley(train, test, cfg);
    std::vector<std::size_t> all(train.n);
    std::iota(all.begin(), all.end(), 0);
    const double total = std::accumulate(r.scores.begin(), r.scores.end(), 0.0);
    CHECK(total ==
          doctest::Approx(knn_utility(train, test, all, cfg.k_neighbors))
              .epsilon(1e-9));
  }
}

TEST_CASE("hand-checked two-point instance") {
  // One test point at the origin; train point 0 matches at distance 1,
  // train point 1 mismatches at distance 2. With K = 1 the closed form
  // gives scores {1, 0}.
  LabeledView train;
  train.n = 2;
  train.width = 1;
  train.features = {1.0, 2.0};
  train.labels = {1, 0};
  LabeledView test;
  test.n = 1;
  test.width = 1;
  test.features = {0.0};
  test.labels = {1};
  ValuationConfig cfg;
  cfg.k_neighbors = 1;
  const ValuationResult r = knn_shapley(train, test, cfg);
  CHECK(r.scores[0] == doctest::Approx(1.0));
  CHECK(r.scores[1] == doctest::Approx(0.0));
}

TEST_CASE("duplicate train points receive related scores deterministically") {
  LabeledView train;
  train.n = 3;
  train.width = 1;
  train.features = {1.0, 1.0, 5.0};
  train.labels = {1, 1, 0};
  LabeledView test;
  test.n = 1;
  test.width = 1;
  test.features = {0.0};
  test.labels = {1};
  ValuationConfig cfg;
  cfg.k_neighbors = 1;
  const ValuationResult a = knn_shapley(train, test, cfg);
  const ValuationResult b = knn_shapley(train, test, cfg);
  CHECK(a.scores == b.scores);  // tie-break is deterministic
  CHECK(a.scores[0] + a.scores[1] ==
        doctest::Approx(knn_utility(train, test, {0, 1, 2}, 1)).epsilon(1e-9));
}

TEST_CASE("continuous targets bin by real-data quantiles") {
  const std::vector<double> real = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  const std::vector<double> syn = {-10.0, 3.4, 3.6, 100.0};
  const auto [rb, sb] = bin_continuous_target(real, syn, 2);
  // median of real is 3.5
  CHECK(rb == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
  CHECK(sb == std::vector<int>{0, 0, 1, 1});  // out-of-range values clamp
  CHECK_THROWS_AS(bin_continuous_target({2.0, 2.0, 2.0}, syn, 2), Error);
}

TEST_CASE("labeled view drops the target dimensions from the features") {
  const Dataset d = testutil::tiny_dataset();
  const auto enc = FittedEncoder::fit(d);
  ValuationConfig cfg;
  const LabeledView v = make_labeled_view(d, enc, d, cfg);
  CHECK(v.n == d.n_rows());
  CHECK(v.width == enc.width() - 2);  // binary target block removed
  for (std::size_t i = 0; i < v.n; ++i) {
    CHECK(v.labels[i] == int(d.rows[i][3]));
  }
}

TEST_CASE("valuation csv export") {
  testutil::TempDir tmp("val");
  ValuationResult r;
  r.scores = {0.5, -0.25};
  save_valuation_csv(r, tmp.file("v.csv"));
  CHECK(testutil::slurp(tmp.file("v.csv")) ==
        "row_index,shapley_score\n0,0.5\n1,-0.25\n");
}
