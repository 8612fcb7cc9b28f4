#include "synrl/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "synrl/errors.hpp"

namespace synrl {

void RewardConfig::validate() const {
  if (!std::isfinite(fidelity_weight) || fidelity_weight < 0.0) {
    throw ConfigError("fidelity_weight must be finite and >= 0");
  }
}

double fidelity_l1(const FittedEncoder& enc, const Row& x, const Row& x_hat) {
  const auto a = enc.encode(x);
  const auto b = enc.encode(x_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double reward(double utility, const FittedEncoder& enc, const Row& x,
              const Row& x_hat, const RewardConfig& config) {
  config.validate();
  if (!std::isfinite(utility)) throw ConfigError("reward: non-finite utility");
  return utility - config.fidelity_weight * fidelity_l1(enc, x, x_hat);
}

RewardReport RewardReport::build(const std::vector<double>& utilities,
                                 const std::vector<double>& fidelities,
                                 const RewardConfig& config) {
  config.validate();
  if (utilities.size() != fidelities.size()) {
    throw DimensionError("RewardReport: utility/fidelity length mismatch");
  }
  RewardReport report;
  report.entries.resize(utilities.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    auto& e = report.entries[i];
    e.utility = utilities[i];
    e.fidelity_l1 = fidelities[i];
    e.reward = e.utility - config.fidelity_weight * e.fidelity_l1;
    if (!std::isfinite(e.reward)) throw NumericError("non-finite reward entry");
    sum += e.reward;
  }
  const double n = static_cast<double>(report.entries.size());
  report.mean = report.entries.empty() ? 0.0 : sum / n;
  double ss = 0.0;
  for (const auto& e : report.entries) {
    const double d = e.reward - report.mean;
    ss += d * d;
  }
  report.stddev = report.entries.empty() ? 0.0 : std::sqrt(ss / n);
  return report;
}

std::vector<std::size_t> rank_batch(const std::vector<double>& rewards) {
  for (double r : rewards) {
    if (!std::isfinite(r)) throw ConfigError("rank_batch: non-finite reward");
  }
  std::vector<std::size_t> order(rewards.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rewards[a] > rewards[b]; });
  return order;
}

Dataset select_top_k(const Dataset& batch, const std::vector<double>& rewards,
                     std::size_t k) {
  if (rewards.size() != batch.n_rows()) {
    throw DimensionError("select_top_k: rewards length mismatch");
  }
  if (k > batch.n_rows()) throw ConfigError("select_top_k: k exceeds batch size");
  const auto order = rank_batch(rewards);
  Dataset out{batch.schema, {}};
  out.rows.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.rows.push_back(batch.rows[order[i]]);
  return out;
}

void save_reward_csv(const RewardReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "row_index,utility,fidelity_l1,reward\n";
  char buf[128];
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g", i, e.utility,
                  e.fidelity_l1, e.reward);
    out << buf << '\n';
  }
}

}  // namespace synrl
