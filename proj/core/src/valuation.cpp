#include "synrl/valuation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "synrl/errors.hpp"

namespace synrl {

namespace {

double sq_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

/// Train indices sorted by ascending distance to the test row; ties go to
/// the lower row index.
std::vector<std::size_t> rank_by_distance(const LabeledView& train,
                                          const double* test_row) {
  std::vector<double> dist(train.n);
  for (std::size_t i = 0; i < train.n; ++i) {
    dist[i] = sq_dist(train.row(i), test_row, train.width);
  }
  std::vector<std::size_t> order(train.n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  return order;
}

}  // namespace

void ValuationConfig::validate() const {
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  if (continuous_target_bins < 2) throw ConfigError("continuous_target_bins must be >= 2");
}

std::pair<std::vector<int>, std::vector<int>> bin_continuous_target(
    const std::vector<double>& real_labels, const std::vector<double>& syn_labels,
    std::size_t bins) {
  if (bins < 2) throw ConfigError("bins must be >= 2");
  if (real_labels.empty()) throw ConfigError("no real labels to bin");
  std::vector<double> sorted = real_labels;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw ConfigError("cannot bin an all-equal continuous target");
  }
  // Quantile boundaries between consecutive bins.
  std::vector<double> bounds(bins - 1);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t b = 1; b < bins; ++b) {
    const double q = static_cast<double>(b) / static_cast<double>(bins);
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    bounds[b - 1] = sorted[lo] +
                    frac * (sorted[std::min(lo + 1, sorted.size() - 1)] - sorted[lo]);
  }
  auto bin_of = [&](double v) {
    int b = 0;
    while (b < static_cast<int>(bounds.size()) && v > bounds[b]) ++b;
    return b;  // below-range values land in bin 0, above-range in the last
  };
  std::vector<int> real_binned(real_labels.size()), syn_binned(syn_labels.size());
  for (std::size_t i = 0; i < real_labels.size(); ++i) real_binned[i] = bin_of(real_labels[i]);
  for (std::size_t i = 0; i < syn_labels.size(); ++i) syn_binned[i] = bin_of(syn_labels[i]);
  return {std::move(real_binned), std::move(syn_binned)};
}

LabeledView make_labeled_view(const Dataset& data, const FittedEncoder& enc,
                              const Dataset& real_reference,
                              const ValuationConfig& config) {
  config.validate();
  const auto target = data.schema.target_index();
  if (!target) throw SchemaError("dataset has no Target column");
  const auto& lay = enc.layout()[*target];

  LabeledView view;
  view.n = data.n_rows();
  view.width = enc.width() - lay.width;
  view.features.reserve(view.n * view.width);
  for (const auto& row : data.rows) {
    const auto full = enc.encode(row);
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (i < lay.offset || i >= lay.offset + lay.width) view.features.push_back(full[i]);
    }
  }

  if (data.schema.columns[*target].kind == ColumnKind::Categorical) {
    view.labels.reserve(view.n);
    for (const auto& row : data.rows) {
      view.labels.push_back(static_cast<int>(row[*target]));
    }
  } else {
    std::vector<double> real_vals, own_vals;
    for (const auto& row : real_reference.rows) real_vals.push_back(row[*target]);
    for (const auto& row : data.rows) own_vals.push_back(row[*target]);
    auto [_, binned] =
        bin_continuous_target(real_vals, own_vals, config.continuous_target_bins);
    view.labels = std::move(binned);
  }
  return view;
}

ValuationResult knn_shapley(const LabeledView& train, const LabeledView& test,
                            const ValuationConfig& config) {
  config.validate();
  if (train.n == 0 || test.n == 0) throw ConfigError("knn_shapley: empty inputs");
  if (train.width != test.width) throw DimensionError("knn_shapley: feature width mismatch");

  const std::size_t n = train.n;
  const double k = static_cast<double>(config.k_neighbors);
  std::vector<double> total(n, 0.0);
  std::vector<double> s(n);
  for (std::size_t t = 0; t < test.n; ++t) {
    const auto order = rank_by_distance(train, test.row(t));
    const int y = test.labels[t];
    auto match = [&](std::size_t rank) {
      return train.labels[order[rank]] == y ? 1.0 : 0.0;
    };
    // Base case m/N holds only when N >= K; for N < K every subset keeps all
    // of its members among the K neighbors and the exact value is m/K, so the
    // correct denominator in general is max(N, K).
    s[order[n - 1]] =
        match(n - 1) / std::max(static_cast<double>(n), k);
    for (std::size_t j = n - 1; j-- > 0;) {
      const double dj = static_cast<double>(j + 1);  // 1-based rank
      s[order[j]] = s[order[j + 1]] +
                    (match(j) - match(j + 1)) / k * std::min(k, dj) / dj;
    }
    for (std::size_t i = 0; i < n; ++i) total[i] += s[i];
  }
  ValuationResult result;
  result.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.scores[i] = total[i] / static_cast<double>(test.n);
  }
  return result;
}

double knn_utility(const LabeledView& train, const LabeledView& test,
                   const std::vector<std::size_t>& subset, std::size_t k) {
  if (subset.empty()) return 0.0;  // V(empty) := 0
  double acc = 0.0;
  for (std::size_t t = 0; t < test.n; ++t) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(subset.size());
    for (auto i : subset) {
      dist.emplace_back(sq_dist(train.row(i), test.row(t), train.width), i);
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t kk = std::min<std::size_t>(k, dist.size());
    double hits = 0.0;
    for (std::size_t j = 0; j < kk; ++j) {
      if (train.labels[dist[j].second] == test.labels[t]) hits += 1.0;
    }
    acc += hits / static_cast<double>(k);
  }
  return acc / static_cast<double>(test.n);
}

ValuationResult exact_shapley(const LabeledView& train, const LabeledView& test,
                              const ValuationConfig& config,
                              const SubsetValueFn& value_fn) {
  config.validate();
  const std::size_t n = train.n;
  if (n == 0) throw ConfigError("exact_shapley: empty train set");
  if (n > 12) throw ConfigError("exact_shapley: N > 12 is intractable");

  SubsetValueFn v = value_fn;
  if (!v) {
    v = [&](const std::vector<std::size_t>& subset) {
      return knn_utility(train, test, subset, config.k_neighbors);
    };
  }

  // V over all 2^N subsets, memoized by bitmask.
  const std::size_t n_masks = std::size_t{1} << n;
  std::vector<double> value(n_masks);
  std::vector<std::size_t> subset;
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) subset.push_back(i);
    }
    value[mask] = subset.empty() ? 0.0 : v(subset);
  }

  // Binomial coefficients C(N-1, s).
  std::vector<double> choose(n, 1.0);
  for (std::size_t s2 = 1; s2 < n; ++s2) {
    choose[s2] = choose[s2 - 1] * static_cast<double>(n - s2) / static_cast<double>(s2);
  }

  ValuationResult result;
  result.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      acc += (value[mask | bit] - value[mask]) / choose[size];
    }
    result.scores[i] = acc / static_cast<double>(n);
  }
  return result;
}

void save_valuation_csv(const ValuationResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "row_index,shapley_score\n";
  char buf[40];
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", result.scores[i]);
    out << i << ',' << buf << '\n';
  }
}

}  // namespace synrl
