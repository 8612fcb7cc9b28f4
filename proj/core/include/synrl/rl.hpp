#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synrl/reward.hpp"
#include "synrl/schema.hpp"
#include "synrl/vae.hpp"
#include "synrl/valuation.hpp"

namespace synrl {

struct RlConfig {
  std::size_t finetune_epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  double clip_epsilon = 0.2;   // in (0, 1)
  double kl_coefficient = 1.0; // >= 0, penalty toward the frozen reference
  std::size_t samples_per_record = 1;
  bool advantage_normalization = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FinetuneEpoch {
  double mean_reward = 0.0;
  double mean_utility = 0.0;
  double mean_fidelity = 0.0;
  double mean_kl = 0.0;      // mean log pi_old - log pi_ref over episodes
  double objective = 0.0;    // mean clipped surrogate
};

struct FinetuneLog {
  std::vector<FinetuneEpoch> epochs;
};

struct FinetuneResult {
  GeneratorModel model;
  FinetuneLog log;
};

/// PPO-style fine-tuning of a fitted generator. Each epoch conditionally
/// regenerates every training record, scores the batch with KNN data-Shapley
/// against the held-out test split, penalizes encoded-space drift, and takes
/// clipped policy-gradient steps on encoder, decoder, and log-sigmas. The
/// reference policy is a frozen copy of the input model.
FinetuneResult finetune(const GeneratorModel& base, const Dataset& real_train,
                        const Dataset& real_test,
                        const ValuationConfig& valuation_config,
                        const RewardConfig& reward_config, const RlConfig& config);

/// True once mean reward has not improved on its best value for `patience`
/// consecutive epochs.
bool stop_criterion(const FinetuneLog& log, std::size_t patience = 5);

void save_finetune_csv(const FinetuneLog& log, const std::string& path);

}  // namespace synrl
