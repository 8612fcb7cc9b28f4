#include "synrl/rl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace synrl {

void RlConfig::validate() const {
  if (finetune_epochs == 0) throw ConfigError("finetune_epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and positive");
  }
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ConfigError("clip_epsilon must lie in (0, 1)");
  }
  if (!(kl_coefficient >= 0.0) || !std::isfinite(kl_coefficient)) {
    throw ConfigError("kl_coefficient must be finite and >= 0");
  }
  if (samples_per_record == 0) throw ConfigError("samples_per_record must be >= 1");
}

FinetuneResult finetune(const GeneratorModel& base, const Dataset& real_train,
                        const Dataset& real_test,
                        const ValuationConfig& valuation_config,
                        const RewardConfig& reward_config, const RlConfig& config) {
  config.validate();
  valuation_config.validate();
  reward_config.validate();
  if (real_train.rows.empty() || real_test.rows.empty()) {
    throw ConfigError("finetune: train and test splits must be non-empty");
  }

  PolicyPair pair{base, base};
  GeneratorModel& model = pair.current;
  const GeneratorModel& ref = pair.reference;
  const FittedEncoder& enc = model.enc;

  std::vector<std::vector<double>> x_enc(real_train.n_rows());
  for (std::size_t i = 0; i < real_train.n_rows(); ++i) {
    x_enc[i] = enc.encode(real_train.rows[i]);
  }
  const LabeledView test_view =
      make_labeled_view(real_test, enc, real_train, valuation_config);

  Adam opt_enc(config.learning_rate);
  Adam opt_dec(config.learning_rate);
  Adam opt_ls(config.learning_rate);

  const std::size_t n_episodes = real_train.n_rows() * config.samples_per_record;
  FinetuneResult result;
  for (std::size_t epoch = 0; epoch < config.finetune_epochs; ++epoch) {
    Rng rng(Rng::mix(config.seed, epoch));

    // Roll out the whole batch under the current policy.
    std::vector<Episode> episodes;
    episodes.reserve(n_episodes);
    Dataset synthetic{real_train.schema, {}};
    synthetic.rows.reserve(n_episodes);
    for (std::size_t e = 0; e < n_episodes; ++e) {
      const std::size_t rec = e / config.samples_per_record;
      episodes.push_back(conditional_generate(model, real_train.rows[rec], rng));
      synthetic.rows.push_back(episodes.back().x_hat);
    }

    // One valuation pass per epoch covers every episode.
    const LabeledView syn_view =
        make_labeled_view(synthetic, enc, real_train, valuation_config);
    const ValuationResult shapley = knn_shapley(syn_view, test_view, valuation_config);

    FinetuneEpoch stats;
    std::vector<double> gain(n_episodes);
    for (std::size_t e = 0; e < n_episodes; ++e) {
      const std::size_t rec = e / config.samples_per_record;
      const double fid = fidelity_l1(enc, real_train.rows[rec], episodes[e].x_hat);
      const double r = shapley.scores[e] - reward_config.fidelity_weight * fid;
      const double kl = episodes[e].log_prob -
                        log_prob_under(ref, episodes[e].z, episodes[e].x_hat);
      gain[e] = r - config.kl_coefficient * kl;
      if (!std::isfinite(gain[e])) {
        throw NumericError("finetune: non-finite reward at epoch " +
                           std::to_string(epoch));
      }
      stats.mean_utility += shapley.scores[e];
      stats.mean_fidelity += fid;
      stats.mean_reward += r;
      stats.mean_kl += kl;
    }
    const double inv_n = 1.0 / static_cast<double>(n_episodes);
    stats.mean_utility *= inv_n;
    stats.mean_fidelity *= inv_n;
    stats.mean_reward *= inv_n;
    stats.mean_kl *= inv_n;

    std::vector<std::size_t> order(n_episodes);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<double> g_enc(model.encoder_net.params().size());
    std::vector<double> g_dec(model.decoder_net.params().size());
    std::vector<double> g_ls(model.dec_log_sigma.size());
    for (std::size_t lo = 0; lo < n_episodes; lo += config.batch_size) {
      const std::size_t hi = std::min(lo + config.batch_size, n_episodes);
      const std::size_t mb = hi - lo;

      std::vector<double> adv(mb);
      for (std::size_t k = 0; k < mb; ++k) adv[k] = gain[order[lo + k]];
      if (config.advantage_normalization) {
        // A zero-variance minibatch carries no ranking signal; make that
        // exact so constant rewards provably freeze the parameters.
        const auto [lo_it, hi_it] = std::minmax_element(adv.begin(), adv.end());
        if (*lo_it == *hi_it) {
          std::fill(adv.begin(), adv.end(), 0.0);
        } else {
          const double mu = std::accumulate(adv.begin(), adv.end(), 0.0) /
                            static_cast<double>(mb);
          double var = 0.0;
          for (double a : adv) var += (a - mu) * (a - mu);
          const double sd = std::sqrt(var / static_cast<double>(mb)) + 1e-8;
          for (double& a : adv) a = (a - mu) / sd;
        }
      }

      std::fill(g_enc.begin(), g_enc.end(), 0.0);
      std::fill(g_dec.begin(), g_dec.end(), 0.0);
      std::fill(g_ls.begin(), g_ls.end(), 0.0);
      for (std::size_t k = 0; k < mb; ++k) {
        const Episode& ep = episodes[order[lo + k]];
        const std::size_t rec = order[lo + k] / config.samples_per_record;
        const double lp_new = policy_log_prob_and_grad(
            model, x_enc[rec], ep.eps_latent, ep.x_hat, 0.0, nullptr, nullptr,
            nullptr);
        const double ratio = std::exp(lp_new - ep.log_prob);
        const double clipped =
            std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
        stats.objective += std::min(ratio * adv[k], clipped * adv[k]) * inv_n;
        // The clipped branch has zero gradient; the unclipped branch is
        // active whenever it attains the min.
        const bool active = adv[k] >= 0.0 ? ratio <= 1.0 + config.clip_epsilon
                                          : ratio >= 1.0 - config.clip_epsilon;
        if (!active) continue;
        const double coef = -adv[k] * ratio / static_cast<double>(mb);  // ascent
        policy_log_prob_and_grad(model, x_enc[rec], ep.eps_latent, ep.x_hat, coef,
                                 &g_enc, &g_dec, &g_ls);
      }
      opt_enc.step(model.encoder_net.params(), g_enc);
      opt_dec.step(model.decoder_net.params(), g_dec);
      opt_ls.step(model.dec_log_sigma, g_ls);
      for (double& s : model.dec_log_sigma) s = std::clamp(s, -5.0, 5.0);
    }
    for (double p : model.encoder_net.params()) {
      if (!std::isfinite(p)) {
        throw NumericError("finetune: non-finite parameter at epoch " +
                           std::to_string(epoch));
      }
    }
    result.log.epochs.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

bool stop_criterion(const FinetuneLog& log, std::size_t patience) {
  if (patience == 0) throw ConfigError("stop_criterion: patience must be >= 1");
  if (log.epochs.size() <= patience) return false;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_at = 0;
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    if (log.epochs[i].mean_reward > best) {
      best = log.epochs[i].mean_reward;
      best_at = i;
    }
  }
  return log.epochs.size() - 1 - best_at >= patience;
}

void save_finetune_csv(const FinetuneLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "epoch,mean_reward,mean_utility,mean_fidelity,mean_kl,objective\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const auto& e = log.epochs[i];
    out << i;
    put(e.mean_reward);
    put(e.mean_utility);
    put(e.mean_fidelity);
    put(e.mean_kl);
    put(e.objective);
    out << '\n';
  }
}

}  // namespace synrl
