#include "synrl/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace synrl {

std::size_t worker_threads() {
  if (const char* env = std::getenv("SYNRL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void ForestConfig::validate() const {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
}

namespace {

struct SplitCandidate {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // impurity decrease proxy; larger is better
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x,
              const std::vector<double>& y, ForestTask task,
              std::size_t n_classes, const ForestConfig& cfg, std::uint64_t seed)
      : x_(x), y_(y), task_(task), n_classes_(n_classes), cfg_(cfg), rng_(seed) {}

  Forest::Tree build() {
    std::vector<std::size_t> samples;
    const std::size_t n = x_.size();
    samples.reserve(n);
    if (cfg_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) samples.push_back(rng_.below(n));
      std::sort(samples.begin(), samples.end());  // index tie-breaks stay row-ordered
    } else {
      for (std::size_t i = 0; i < n; ++i) samples.push_back(i);
    }
    Forest::Tree tree;
    grow(tree, samples, 0);
    return tree;
  }

 private:
  std::size_t grow(Forest::Tree& tree, const std::vector<std::size_t>& samples,
                   std::size_t depth) {
    const std::size_t node_id = tree.nodes.size();
    tree.nodes.emplace_back();

    const bool depth_ok =
        cfg_.max_depth == ForestConfig::kUnlimitedDepth || depth < cfg_.max_depth;
    SplitCandidate split;
    if (depth_ok && samples.size() >= cfg_.min_samples_split && !pure(samples)) {
      split = best_split(samples);
    }
    if (!split.found) {
      tree.nodes[node_id].leaf = leaf_value(samples);
      return node_id;
    }

    std::vector<std::size_t> left, right;
    for (auto s : samples) {
      (x_[s][split.feature] <= split.threshold ? left : right).push_back(s);
    }
    const std::size_t left_id = grow(tree, left, depth + 1);
    const std::size_t right_id = grow(tree, right, depth + 1);
    auto& node = tree.nodes[node_id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
  }

  bool pure(const std::vector<std::size_t>& samples) const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (y_[samples[i]] != y_[samples[0]]) return false;
    }
    return true;
  }

  std::vector<double> leaf_value(const std::vector<std::size_t>& samples) const {
    if (task_ == ForestTask::Regression) {
      double sum = 0.0;
      for (auto s : samples) sum += y_[s];
      return {sum / static_cast<double>(samples.size())};
    }
    std::vector<double> probs(n_classes_, 0.0);
    for (auto s : samples) probs[static_cast<std::size_t>(y_[s])] += 1.0;
    for (auto& p : probs) p /= static_cast<double>(samples.size());
    return probs;
  }

  std::size_t features_per_split() const {
    if (cfg_.features_per_split > 0) {
      return std::min(cfg_.features_per_split, x_[0].size());
    }
    const double p = static_cast<double>(x_[0].size());
    const double m = task_ == ForestTask::Classification
                         ? std::sqrt(p)
                         : std::max(1.0, p / 3.0);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(m)));
  }

  SplitCandidate best_split(const std::vector<std::size_t>& samples) {
    const std::size_t p = x_[0].size();
    std::vector<std::size_t> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    rng_.shuffle(feats);
    feats.resize(features_per_split());
    std::sort(feats.begin(), feats.end());  // evaluation order fixes tie-breaks

    SplitCandidate best;
    for (auto f : feats) {
      eval_feature(samples, f, best);
    }
    return best;
  }

  /// Scans candidate thresholds (midpoints between distinct consecutive
  /// sorted values) and keeps the best-scoring split. Ties keep the earlier
  /// (lower feature, then lower threshold) candidate.
  void eval_feature(const std::vector<std::size_t>& samples, std::size_t f,
                    SplitCandidate& best) {
    std::vector<std::pair<double, double>> vals;  // (feature value, label)
    vals.reserve(samples.size());
    for (auto s : samples) vals.emplace_back(x_[s][f], y_[s]);
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return;

    const double n = static_cast<double>(vals.size());
    if (task_ == ForestTask::Classification) {
      std::vector<double> total(n_classes_, 0.0), left(n_classes_, 0.0);
      for (const auto& [v, y] : vals) total[static_cast<std::size_t>(y)] += 1.0;
      double nl = 0.0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left[static_cast<std::size_t>(vals[i].second)] += 1.0;
        nl += 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nr = n - nl;
        double gl = 1.0, gr = 1.0;
        for (std::size_t c = 0; c < n_classes_; ++c) {
          const double pl = left[c] / nl, pr = (total[c] - left[c]) / nr;
          gl -= pl * pl;
          gr -= pr * pr;
        }
        const double score = -(nl * gl + nr * gr) / n;  // negative weighted Gini
        consider(best, f, 0.5 * (vals[i].first + vals[i + 1].first), score);
      }
    } else {
      double total_sum = 0.0;
      for (const auto& [v, y] : vals) total_sum += y;
      double left_sum = 0.0, nl = 0.0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left_sum += vals[i].second;
        nl += 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nr = n - nl;
        const double right_sum = total_sum - left_sum;
        // maximizing between-group sum of squares == minimizing variance
        const double score =
            left_sum * left_sum / nl + right_sum * right_sum / nr;
        consider(best, f, 0.5 * (vals[i].first + vals[i + 1].first), score);
      }
    }
  }

  static void consider(SplitCandidate& best, std::size_t f, double threshold,
                       double score) {
    if (!best.found || score > best.score) {
      best.found = true;
      best.feature = static_cast<int>(f);
      best.threshold = threshold;
      best.score = score;
    }
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& y_;
  ForestTask task_;
  std::size_t n_classes_;
  const ForestConfig& cfg_;
  Rng rng_;
};

const std::vector<double>& tree_leaf(const Forest::Tree& tree,
                                     const std::vector<double>& row) {
  std::size_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& nd = tree.nodes[node];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                     : nd.right;
  }
  return tree.nodes[node].leaf;
}

}  // namespace

Forest fit_forest(const std::vector<std::vector<double>>& features,
                  const std::vector<double>& labels, ForestTask task,
                  const ForestConfig& config, std::size_t n_classes) {
  config.validate();
  if (features.empty()) throw ConfigError("fit_forest: no samples");
  if (features.size() != labels.size()) {
    throw DimensionError("fit_forest: features/labels length mismatch");
  }

  Forest forest;
  forest.task = task;
  forest.n_features = features[0].size();
  if (task == ForestTask::Classification) {
    double hi = 0.0;
    for (double y : labels) {
      if (y != std::floor(y) || y < 0) throw ConfigError("fit_forest: bad class label");
      hi = std::max(hi, y);
    }
    forest.n_classes = std::max(n_classes, static_cast<std::size_t>(hi) + 1);
  }
  forest.trees.resize(config.n_trees);

  const std::size_t n_workers = std::min(worker_threads(), config.n_trees);
  auto run = [&](std::size_t worker) {
    for (std::size_t t = worker; t < config.n_trees; t += n_workers) {
      TreeBuilder builder(features, labels, task, forest.n_classes, config,
                          Rng::mix(config.seed, t));
      forest.trees[t] = builder.build();
    }
  };
  if (n_workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  return forest;
}

std::vector<std::vector<double>> Forest::predict_proba(
    const std::vector<std::vector<double>>& features) const {
  std::vector<std::vector<double>> out;
  out.reserve(features.size());
  const std::size_t width = task == ForestTask::Classification ? n_classes : 1;
  for (const auto& row : features) {
    if (row.size() != n_features) throw DimensionError("predict: feature width mismatch");
    std::vector<double> acc(width, 0.0);
    for (const auto& tree : trees) {
      const auto& leaf = tree_leaf(tree, row);
      for (std::size_t i = 0; i < width; ++i) acc[i] += leaf[i];
    }
    for (auto& v : acc) v /= static_cast<double>(trees.size());
    out.push_back(std::move(acc));
  }
  return out;
}

std::vector<double> Forest::predict(
    const std::vector<std::vector<double>>& features) const {
  const auto proba = predict_proba(features);
  std::vector<double> out;
  out.reserve(proba.size());
  for (const auto& row : proba) {
    if (task == ForestTask::Regression) {
      out.push_back(row[0]);
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
      }
      out.push_back(static_cast<double>(best));
    }
  }
  return out;
}

}  // namespace synrl
