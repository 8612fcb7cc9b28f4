#include "synrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace synrl {

namespace {

double euclid(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<double> column_values(const Dataset& data, std::size_t c) {
  std::vector<double> v;
  v.reserve(data.n_rows());
  for (const auto& row : data.rows) v.push_back(row[c]);
  return v;
}

void require_shared_schema(const Dataset& a, const Dataset& b, const char* op) {
  if (a.schema.columns.size() != b.schema.columns.size()) {
    throw SchemaError(std::string(op) + ": column count mismatch");
  }
  for (std::size_t c = 0; c < a.schema.columns.size(); ++c) {
    if (a.schema.columns[c].name != b.schema.columns[c].name ||
        a.schema.columns[c].kind != b.schema.columns[c].kind) {
      throw SchemaError(std::string(op) + ": schema mismatch at column " +
                        a.schema.columns[c].name);
    }
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

bool has_variance(const std::vector<double>& v) {
  for (double x : v) {
    if (x != v[0]) return true;
  }
  return false;
}

/// Quantile bin boundaries of a continuous column, from real data only.
std::vector<double> quantile_bounds(std::vector<double> vals, std::size_t bins) {
  std::sort(vals.begin(), vals.end());
  std::vector<double> bounds;
  const double n = static_cast<double>(vals.size());
  for (std::size_t b = 1; b < bins; ++b) {
    const double pos = static_cast<double>(b) / static_cast<double>(bins) * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    bounds.push_back(vals[lo] +
                     frac * (vals[std::min(lo + 1, vals.size() - 1)] - vals[lo]));
  }
  return bounds;
}

int bin_index(double v, const std::vector<double>& bounds) {
  int b = 0;
  while (b < static_cast<int>(bounds.size()) && v > bounds[b]) ++b;
  return b;
}

Dataset subsample(const Dataset& data, std::size_t target, std::uint64_t seed) {
  if (data.n_rows() <= target) return data;
  std::vector<std::size_t> order(data.n_rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  Dataset out{data.schema, {}};
  out.rows.reserve(target);
  for (std::size_t i = 0; i < target; ++i) out.rows.push_back(data.rows[order[i]]);
  return out;
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw DimensionError("auroc: bad inputs");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // 1-based ranks with tie averaging.
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos_ranks = 0.0, n_pos = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == 1) {
      pos_ranks += rank[k];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw ConfigError("auroc: single-class labels");
  return (pos_ranks - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

UtilityBlock ml_efficiency(const Dataset& synthetic, const Dataset& real,
                           const std::string& target, ForestTask task,
                           const ForestConfig& forest_config, std::size_t folds,
                           std::uint64_t seed, bool real_reference_mode) {
  require_shared_schema(synthetic, real, "ml_efficiency");
  const std::size_t t = real.schema.column_index(target);
  if (synthetic.schema.target_index() != t && synthetic.schema.column_index(target) != t) {
    throw SchemaError("ml_efficiency: target absent from synthetic");
  }
  const auto enc = FittedEncoder::fit(real);
  const auto& lay = enc.layout()[t];
  std::size_t n_classes = 0;
  if (task == ForestTask::Classification) {
    n_classes = real.schema.columns[t].categories.size();
    if (n_classes != 2) {
      throw ConfigError("ml_efficiency: AUROC needs a binary target");
    }
  }

  auto encode_features = [&](const Dataset& d) {
    std::vector<std::vector<double>> out;
    out.reserve(d.n_rows());
    for (const auto& row : d.rows) {
      const auto full = enc.encode(row);
      std::vector<double> feat;
      feat.reserve(full.size() - lay.width);
      for (std::size_t k = 0; k < full.size(); ++k) {
        if (k < lay.offset || k >= lay.offset + lay.width) feat.push_back(full[k]);
      }
      out.push_back(std::move(feat));
    }
    return out;
  };

  const auto syn_x = encode_features(synthetic);
  const auto real_x = encode_features(real);
  std::vector<double> syn_y = column_values(synthetic, t);
  std::vector<double> real_y = column_values(real, t);

  std::vector<std::size_t> order(real.n_rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  UtilityBlock block;
  block.metric = task == ForestTask::Classification ? "AUROC" : "MSE";
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * real.n_rows() / folds;
    const std::size_t hi = (f + 1) * real.n_rows() / folds;
    std::vector<std::vector<double>> test_x;
    std::vector<double> test_y;
    for (std::size_t k = lo; k < hi; ++k) {
      test_x.push_back(real_x[order[k]]);
      test_y.push_back(real_y[order[k]]);
    }
    if (test_x.empty()) continue;

    std::vector<std::vector<double>> train_x;
    std::vector<double> train_y;
    if (real_reference_mode) {
      for (std::size_t k = 0; k < real.n_rows(); ++k) {
        if (k < lo || k >= hi) {
          train_x.push_back(real_x[order[k]]);
          train_y.push_back(real_y[order[k]]);
        }
      }
    } else {
      train_x = syn_x;
      train_y = syn_y;
    }

    ForestConfig cfg = forest_config;
    cfg.seed = Rng::mix(forest_config.seed, f);
    const Forest forest = fit_forest(train_x, train_y, task, cfg, n_classes);

    if (task == ForestTask::Classification) {
      std::vector<int> labels;
      for (double y : test_y) labels.push_back(static_cast<int>(y));
      const bool single_class =
          std::all_of(labels.begin(), labels.end(),
                      [&](int l) { return l == labels[0]; });
      if (single_class) {
        ++block.skipped_folds;
        continue;
      }
      const auto proba = forest.predict_proba(test_x);
      std::vector<double> scores;
      for (const auto& p : proba) scores.push_back(p[1]);
      block.per_fold.push_back(auroc(scores, labels));
    } else {
      const auto pred = forest.predict(test_x);
      double mse = 0.0;
      for (std::size_t k = 0; k < pred.size(); ++k) {
        mse += (pred[k] - test_y[k]) * (pred[k] - test_y[k]);
      }
      block.per_fold.push_back(mse / static_cast<double>(pred.size()));
    }
  }
  if (block.per_fold.empty()) throw ConfigError("ml_efficiency: every fold was skipped");
  block.mean = mean_of(block.per_fold);
  double ss = 0.0;
  for (double v : block.per_fold) ss += (v - block.mean) * (v - block.mean);
  block.std_dev = std::sqrt(ss / static_cast<double>(block.per_fold.size()));
  return block;
}

double silhouette(const Dataset& real, const Dataset& synthetic) {
  require_shared_schema(real, synthetic, "silhouette");
  if (real.n_rows() < 2 || synthetic.n_rows() < 2) {
    throw ConfigError("silhouette: each set needs at least 2 points");
  }
  const auto enc = FittedEncoder::fit(real);
  const auto r = enc.encode_all(real);
  const auto s = enc.encode_all(synthetic);
  const std::size_t nr = r.n_rows, ns = s.n_rows, d = r.width;

  auto point = [&](std::size_t i) {
    return i < nr ? r.row(i) : s.row(i - nr);
  };
  const std::size_t total = nr + ns;
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const bool in_real = i < nr;
    double same = 0.0, other = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      if (j == i) continue;
      const double dist = euclid(point(i), point(j), d);
      ((j < nr) == in_real ? same : other) += dist;
    }
    const double a = same / static_cast<double>((in_real ? nr : ns) - 1);
    const double b = other / static_cast<double>(in_real ? ns : nr);
    const double denom = std::max(a, b);
    acc += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return acc / static_cast<double>(total);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n, std::size_t m) {
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    static_cast<double>(n + m);
  const double lambda = std::sqrt(ne) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * lambda * lambda * j * j);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_dissimilar_pct(const Dataset& real, const Dataset& synthetic,
                         double alpha) {
  require_shared_schema(real, synthetic, "ks_dissimilar_pct");
  std::size_t dissimilar = 0;
  for (std::size_t c = 0; c < real.schema.columns.size(); ++c) {
    const double d = ks_statistic(column_values(real, c), column_values(synthetic, c));
    const double p = ks_pvalue(d, real.n_rows(), synthetic.n_rows());
    if (p < alpha) ++dissimilar;  // strict: p == alpha counts as similar
  }
  return 100.0 * static_cast<double>(dissimilar) /
         static_cast<double>(real.schema.columns.size());
}

double column_shapes(const Dataset& real, const Dataset& synthetic) {
  require_shared_schema(real, synthetic, "column_shapes");
  double acc = 0.0;
  for (std::size_t c = 0; c < real.schema.columns.size(); ++c) {
    const auto& col = real.schema.columns[c];
    if (col.kind == ColumnKind::Continuous) {
      acc += 1.0 - ks_statistic(column_values(real, c), column_values(synthetic, c));
    } else {
      const std::size_t k = col.categories.size();
      std::vector<double> p(k, 0.0), q(k, 0.0);
      for (const auto& row : real.rows) p[static_cast<std::size_t>(row[c])] += 1.0;
      for (const auto& row : synthetic.rows) q[static_cast<std::size_t>(row[c])] += 1.0;
      double tv = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        tv += std::abs(p[i] / static_cast<double>(real.n_rows()) -
                       q[i] / static_cast<double>(synthetic.n_rows()));
      }
      acc += 1.0 - 0.5 * tv;
    }
  }
  return acc / static_cast<double>(real.schema.columns.size());
}

double column_pair_trends(const Dataset& real, const Dataset& synthetic,
                          std::size_t bins) {
  require_shared_schema(real, synthetic, "column_pair_trends");
  const std::size_t nc = real.schema.columns.size();
  if (nc < 2) throw ConfigError("column_pair_trends: needs at least 2 columns");

  // Discretized codes for the contingency path; bins from real data only.
  std::vector<std::vector<int>> real_code(nc), syn_code(nc);
  std::vector<std::size_t> code_width(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& col = real.schema.columns[c];
    if (col.kind == ColumnKind::Categorical) {
      code_width[c] = col.categories.size();
      for (const auto& row : real.rows) real_code[c].push_back(static_cast<int>(row[c]));
      for (const auto& row : synthetic.rows) syn_code[c].push_back(static_cast<int>(row[c]));
    } else {
      const auto bounds = quantile_bounds(column_values(real, c), bins);
      code_width[c] = bins;
      for (const auto& row : real.rows) real_code[c].push_back(bin_index(row[c], bounds));
      for (const auto& row : synthetic.rows) syn_code[c].push_back(bin_index(row[c], bounds));
    }
  }

  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = a + 1; b < nc; ++b) {
      ++pairs;
      const bool both_cont =
          real.schema.columns[a].kind == ColumnKind::Continuous &&
          real.schema.columns[b].kind == ColumnKind::Continuous;
      if (both_cont) {
        const auto ra = column_values(real, a), rb = column_values(real, b);
        const auto sa = column_values(synthetic, a), sb = column_values(synthetic, b);
        if (has_variance(ra) && has_variance(rb) && has_variance(sa) &&
            has_variance(sb)) {
          acc += 1.0 - std::abs(pearson(ra, rb) - pearson(sa, sb)) / 2.0;
          continue;
        }
      }
      // contingency path (also the fallback for constant columns)
      const std::size_t w = code_width[b];
      std::vector<double> p(code_width[a] * w, 0.0), q(code_width[a] * w, 0.0);
      for (std::size_t r = 0; r < real.n_rows(); ++r) {
        p[real_code[a][r] * w + real_code[b][r]] += 1.0 / static_cast<double>(real.n_rows());
      }
      for (std::size_t r = 0; r < synthetic.n_rows(); ++r) {
        q[syn_code[a][r] * w + syn_code[b][r]] += 1.0 / static_cast<double>(synthetic.n_rows());
      }
      double tv = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
      acc += 1.0 - 0.5 * tv;
    }
  }
  return acc / static_cast<double>(pairs);
}

double adversarial_accuracy(const EncodedMatrix& r, const EncodedMatrix& s) {
  if (r.n_rows < 2 || s.n_rows < 2) {
    throw ConfigError("adversarial_accuracy: sets need at least 2 points");
  }
  if (r.width != s.width) throw DimensionError("adversarial_accuracy: width mismatch");
  auto half = [&](const EncodedMatrix& own, const EncodedMatrix& other) {
    double hits = 0.0;
    for (std::size_t i = 0; i < own.n_rows; ++i) {
      double d_cross = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < other.n_rows; ++j) {
        d_cross = std::min(d_cross, euclid(own.row(i), other.row(j), own.width));
      }
      double d_loo = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < own.n_rows; ++j) {
        if (j == i) continue;
        d_loo = std::min(d_loo, euclid(own.row(i), own.row(j), own.width));
      }
      if (d_cross > d_loo) hits += 1.0;
    }
    return hits / static_cast<double>(own.n_rows);
  };
  return 0.5 * (half(r, s) + half(s, r));
}

std::pair<double, double> privacy_loss(const Dataset& train_real,
                                       const Dataset& test_real,
                                       const Dataset& synthetic,
                                       std::uint64_t seed) {
  require_shared_schema(train_real, test_real, "privacy_loss");
  require_shared_schema(train_real, synthetic, "privacy_loss");
  const std::size_t m = std::min({train_real.n_rows(), test_real.n_rows(),
                                  synthetic.n_rows()});
  if (m < 2) throw ConfigError("privacy_loss: sets need at least 2 rows");
  const Dataset train = subsample(train_real, m, Rng::mix(seed, 1));
  const Dataset test = subsample(test_real, m, Rng::mix(seed, 2));
  const Dataset syn = subsample(synthetic, m, Rng::mix(seed, 3));

  const auto enc = FittedEncoder::fit(train_real);
  const auto tr = enc.encode_all(train);
  const auto te = enc.encode_all(test);
  const auto sy = enc.encode_all(syn);
  const double signed_loss =
      adversarial_accuracy(te, sy) - adversarial_accuracy(tr, sy);
  return {signed_loss, std::abs(signed_loss)};
}

double mean_inference_risk(const Dataset& train_real, const Dataset& control_real,
                           const Dataset& synthetic,
                           std::size_t n_attacks_per_column, std::uint64_t seed,
                           double continuous_match_sigma) {
  require_shared_schema(train_real, control_real, "mean_inference_risk");
  require_shared_schema(train_real, synthetic, "mean_inference_risk");
  if (control_real.rows.empty()) throw ConfigError("mean_inference_risk: empty control set");
  if (train_real.rows.empty() || synthetic.rows.empty()) {
    throw ConfigError("mean_inference_risk: empty inputs");
  }

  const auto enc = FittedEncoder::fit(train_real);
  const auto train = enc.encode_all(train_real);
  const auto control = enc.encode_all(control_real);
  const auto syn = enc.encode_all(synthetic);
  const std::size_t nc = train_real.schema.columns.size();

  /// Attack success rate on `targets`: nearest synthetic neighbor in the
  /// non-secret dimensions predicts the secret column.
  auto attack_rate = [&](const EncodedMatrix& targets, std::size_t col,
                         std::uint64_t sub_seed) {
    const auto& lay = enc.layout()[col];
    std::vector<std::size_t> idx(targets.n_rows);
    std::iota(idx.begin(), idx.end(), 0);
    if (targets.n_rows > n_attacks_per_column) {
      Rng rng(sub_seed);
      rng.shuffle(idx);
      idx.resize(n_attacks_per_column);
    }
    double hits = 0.0;
    for (auto ti : idx) {
      const double* t = targets.row(ti);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < syn.n_rows; ++j) {
        const double* s = syn.row(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < targets.width; ++k) {
          if (k >= lay.offset && k < lay.offset + lay.width) continue;
          const double d = t[k] - s[k];
          acc += d * d;
        }
        if (acc < best_d) {
          best_d = acc;
          best = j;
        }
      }
      const double* s = syn.row(best);
      bool match;
      if (lay.kind == ColumnKind::Continuous) {
        match = std::abs(t[lay.offset] - s[lay.offset]) <= continuous_match_sigma;
      } else {
        std::size_t ta = 0, sa = 0;
        for (std::size_t k = 1; k < lay.width; ++k) {
          if (t[lay.offset + k] > t[lay.offset + ta]) ta = k;
          if (s[lay.offset + k] > s[lay.offset + sa]) sa = k;
        }
        match = ta == sa;
      }
      if (match) hits += 1.0;
    }
    return hits / static_cast<double>(idx.size());
  };

  double total = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const double a = attack_rate(train, c, Rng::mix(seed, 2 * c));
    const double b = attack_rate(control, c, Rng::mix(seed, 2 * c + 1));
    total += b >= 1.0 ? 0.0 : std::max(0.0, (a - b) / (1.0 - b));
  }
  return total / static_cast<double>(nc);
}

MetricReport evaluate_all(const Dataset& real_train, const Dataset& real_test,
                          const Dataset& synthetic, const std::string& target,
                          ForestTask task, const EvalConfig& config,
                          Provenance provenance) {
  if (synthetic.rows.empty()) throw ConfigError("evaluate_all: empty synthetic dataset");
  require_shared_schema(real_train, synthetic, "evaluate_all");

  auto guarded = [&](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(std::string(name) + ": " + e.what());
    }
  };

  Dataset real_all{real_train.schema, real_train.rows};
  real_all.rows.insert(real_all.rows.end(), real_test.rows.begin(),
                       real_test.rows.end());

  MetricReport report;
  report.provenance = std::move(provenance);
  report.provenance.seed = config.seed;
  report.utility = guarded("ml_efficiency", [&] {
    return ml_efficiency(synthetic, real_all, target, task, config.forest,
                         config.folds, config.seed);
  });
  report.fidelity.silhouette =
      guarded("silhouette", [&] { return silhouette(real_train, synthetic); });
  report.fidelity.pct_dissimilar_columns = guarded("ks_dissimilar_pct", [&] {
    return ks_dissimilar_pct(real_train, synthetic, config.ks_alpha);
  });
  report.fidelity.column_shapes =
      guarded("column_shapes", [&] { return column_shapes(real_train, synthetic); });
  report.fidelity.column_pair_trends = guarded("column_pair_trends", [&] {
    return column_pair_trends(real_train, synthetic, config.pair_trend_bins);
  });
  const auto loss = guarded("privacy_loss", [&] {
    return privacy_loss(real_train, real_test, synthetic, config.seed);
  });
  report.privacy.privacy_loss_signed = loss.first;
  report.privacy.privacy_loss_absolute = loss.second;
  report.privacy.mean_inference_risk = guarded("mean_inference_risk", [&] {
    return mean_inference_risk(real_train, real_test, synthetic,
                               config.inference_attacks_per_column, config.seed,
                               config.continuous_match_sigma);
  });
  return report;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["utility"] = {{"metric", report.utility.metric},
                  {"mean", report.utility.mean},
                  {"std", report.utility.std_dev},
                  {"per_fold", report.utility.per_fold},
                  {"skipped_folds", report.utility.skipped_folds}};
  j["fidelity"] = {{"silhouette", report.fidelity.silhouette},
                   {"pct_dissimilar_columns", report.fidelity.pct_dissimilar_columns},
                   {"column_shapes", report.fidelity.column_shapes},
                   {"column_pair_trends", report.fidelity.column_pair_trends}};
  j["privacy"] = {{"mean_inference_risk", report.privacy.mean_inference_risk},
                  {"privacy_loss_signed", report.privacy.privacy_loss_signed},
                  {"privacy_loss_absolute", report.privacy.privacy_loss_absolute}};
  j["provenance"] = {{"real_dataset_id", report.provenance.real_dataset_id},
                     {"synthetic_dataset_id", report.provenance.synthetic_dataset_id},
                     {"generator_id", report.provenance.generator_id},
                     {"seed", report.provenance.seed},
                     {"config_hash", report.provenance.config_hash}};
  return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  MetricReport r;
  r.utility.metric = j.at("utility").at("metric").get<std::string>();
  r.utility.mean = j.at("utility").at("mean").get<double>();
  r.utility.std_dev = j.at("utility").at("std").get<double>();
  r.utility.per_fold = j.at("utility").at("per_fold").get<std::vector<double>>();
  r.utility.skipped_folds = j.at("utility").at("skipped_folds").get<std::size_t>();
  r.fidelity.silhouette = j.at("fidelity").at("silhouette").get<double>();
  r.fidelity.pct_dissimilar_columns =
      j.at("fidelity").at("pct_dissimilar_columns").get<double>();
  r.fidelity.column_shapes = j.at("fidelity").at("column_shapes").get<double>();
  r.fidelity.column_pair_trends =
      j.at("fidelity").at("column_pair_trends").get<double>();
  r.privacy.mean_inference_risk =
      j.at("privacy").at("mean_inference_risk").get<double>();
  r.privacy.privacy_loss_signed =
      j.at("privacy").at("privacy_loss_signed").get<double>();
  r.privacy.privacy_loss_absolute =
      j.at("privacy").at("privacy_loss_absolute").get<double>();
  r.provenance.real_dataset_id =
      j.at("provenance").at("real_dataset_id").get<std::string>();
  r.provenance.synthetic_dataset_id =
      j.at("provenance").at("synthetic_dataset_id").get<std::string>();
  r.provenance.generator_id = j.at("provenance").at("generator_id").get<std::string>();
  r.provenance.seed = j.at("provenance").at("seed").get<std::uint64_t>();
  r.provenance.config_hash = j.at("provenance").at("config_hash").get<std::string>();
  return r;
}

void save_report_json(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << report_to_json(report);
}

void save_report_csv(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[64];
  auto emit = [&](const std::string& name, double value) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << name << ',' << buf << '\n';
  };
  out << "metric,value\n";
  emit("utility_" + report.utility.metric + "_mean", report.utility.mean);
  emit("utility_" + report.utility.metric + "_std", report.utility.std_dev);
  emit("silhouette", report.fidelity.silhouette);
  emit("pct_dissimilar_columns", report.fidelity.pct_dissimilar_columns);
  emit("column_shapes", report.fidelity.column_shapes);
  emit("column_pair_trends", report.fidelity.column_pair_trends);
  emit("mean_inference_risk", report.privacy.mean_inference_risk);
  emit("privacy_loss_signed", report.privacy.privacy_loss_signed);
  emit("privacy_loss_absolute", report.privacy.privacy_loss_absolute);
}

void save_correlation_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const std::size_t nc = data.schema.columns.size();
  out << "column";
  for (const auto& col : data.schema.columns) out << ',' << col.name;
  out << '\n';
  std::vector<std::vector<double>> cols(nc);
  for (std::size_t c = 0; c < nc; ++c) cols[c] = column_values(data, c);
  char buf[40];
  for (std::size_t a = 0; a < nc; ++a) {
    out << data.schema.columns[a].name;
    for (std::size_t b = 0; b < nc; ++b) {
      double rho = 1.0;
      if (a != b) {
        rho = (has_variance(cols[a]) && has_variance(cols[b]))
                  ? pearson(cols[a], cols[b])
                  : 0.0;
      }
      std::snprintf(buf, sizeof(buf), "%.17g", rho);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace synrl
