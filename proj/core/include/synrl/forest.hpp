#pragma once

#include <cstdint>
#include <vector>

namespace synrl {

enum class ForestTask { Classification, Regression };

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = kUnlimitedDepth;  // 0 forces a single-leaf tree
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;  // 0 -> sqrt(p) / p/3 rule
  bool bootstrap = true;
  std::uint64_t seed = 0;

  static constexpr std::size_t kUnlimitedDepth = ~std::size_t{0};
  void validate() const;
};

/// Bootstrap-aggregated CART trees over encoded features. Axis-aligned
/// splits; Gini impurity for classification, variance reduction for
/// regression; split ties go to the lowest feature index, then threshold.
class Forest {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    std::vector<double> leaf;  // class probabilities, or {mean} for regression
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  ForestTask task = ForestTask::Classification;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;  // classification only
  std::vector<Tree> trees;

  std::vector<std::vector<double>> predict_proba(
      const std::vector<std::vector<double>>& features) const;
  std::vector<double> predict(const std::vector<std::vector<double>>& features) const;
};

/// labels hold class indices (classification) or raw values (regression).
/// n_classes = 0 derives the class count from the labels; pass it explicitly
/// when the training set may be missing classes. Tree training is parallel
/// across trees with deterministic per-tree seeds, capped by SYNRL_THREADS.
Forest fit_forest(const std::vector<std::vector<double>>& features,
                  const std::vector<double>& labels, ForestTask task,
                  const ForestConfig& config, std::size_t n_classes = 0);

/// Parallelism cap from SYNRL_THREADS (falls back to hardware concurrency).
std::size_t worker_threads();

}  // namespace synrl
