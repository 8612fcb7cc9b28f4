#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "synrl/encoder.hpp"
#include "synrl/schema.hpp"

namespace synrl {

struct RewardConfig {
  double fidelity_weight = 1.0;  // must be finite and >= 0

  void validate() const;
};

struct RewardEntry {
  double utility = 0.0;      // Shapley score s_i
  double fidelity_l1 = 0.0;  // encoded-space l1 distance to the paired real row
  double reward = 0.0;       // utility - fidelity_weight * fidelity_l1
};

struct RewardReport {
  std::vector<RewardEntry> entries;
  double mean = 0.0;
  double stddev = 0.0;

  static RewardReport build(const std::vector<double>& utilities,
                            const std::vector<double>& fidelities,
                            const RewardConfig& config);
};

/// l1 distance between encode(x) and encode(x_hat); a flipped categorical
/// value contributes exactly 2.
double fidelity_l1(const FittedEncoder& enc, const Row& x, const Row& x_hat);

double reward(double utility, const FittedEncoder& enc, const Row& x,
              const Row& x_hat, const RewardConfig& config);

/// Indices best-first under a descending stable sort (ties keep input order).
std::vector<std::size_t> rank_batch(const std::vector<double>& rewards);

Dataset select_top_k(const Dataset& batch, const std::vector<double>& rewards,
                     std::size_t k);

void save_reward_csv(const RewardReport& report, const std::string& path);

}  // namespace synrl
