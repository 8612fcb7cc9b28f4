#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "synrl/encoder.hpp"
#include "synrl/schema.hpp"

namespace synrl {

struct ValuationConfig {
  std::size_t k_neighbors = 5;
  std::size_t continuous_target_bins = 2;

  void validate() const;
};

struct ValuationResult {
  std::vector<double> scores;  // one per train record, in row order
};

/// Encoded features (Target-derived dimensions excluded, so labels never
/// leak into distances) plus integer labels.
struct LabeledView {
  std::size_t n = 0;
  std::size_t width = 0;
  std::vector<double> features;  // row-major n x width
  std::vector<int> labels;

  const double* row(std::size_t r) const { return features.data() + r * width; }
};

/// Quantile boundaries from the real labels only; both label sets map to bin
/// indices, rightmost bin closed, out-of-range values clamped.
std::pair<std::vector<int>, std::vector<int>> bin_continuous_target(
    const std::vector<double>& real_labels, const std::vector<double>& syn_labels,
    std::size_t bins);

/// Builds the valuation view of `data`: features encoded by `enc` with the
/// Target column's dimensions dropped. Continuous targets are binned with
/// boundaries from `real_reference` (pass the real dataset; for the real
/// data itself pass it twice).
LabeledView make_labeled_view(const Dataset& data, const FittedEncoder& enc,
                              const Dataset& real_reference,
                              const ValuationConfig& config);

/// Closed-form KNN data-Shapley: O(N log N) per test point, averaged over
/// test points. Distance ties rank the lower row index closer.
ValuationResult knn_shapley(const LabeledView& train, const LabeledView& test,
                            const ValuationConfig& config);

using SubsetValueFn =
    std::function<double(const std::vector<std::size_t>& subset)>;

/// Exact Shapley by full subset enumeration (N <= 12). value_fn defaults to
/// K-NN accuracy of the subset on the test view, with V(empty) = 0.
ValuationResult exact_shapley(const LabeledView& train, const LabeledView& test,
                              const ValuationConfig& config,
                              const SubsetValueFn& value_fn = nullptr);

/// K-NN test accuracy of a train subset; the default utility behind both
/// Shapley routes.
double knn_utility(const LabeledView& train, const LabeledView& test,
                   const std::vector<std::size_t>& subset, std::size_t k);

void save_valuation_csv(const ValuationResult& result, const std::string& path);

}  // namespace synrl
