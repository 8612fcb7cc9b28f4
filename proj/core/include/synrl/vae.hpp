#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synrl/encoder.hpp"
#include "synrl/mlp.hpp"
#include "synrl/schema.hpp"

namespace synrl {

struct VaeConfig {
  std::size_t latent_dim = 16;
  std::vector<std::size_t> encoder_hidden = {128, 128};
  std::vector<std::size_t> decoder_hidden = {128, 128};
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Tabular VAE. The decoder emits, per continuous column, an output mean
/// (paired with a learned per-column log-sigma) and, per categorical column,
/// unnormalized log-probabilities; output slots mirror the encoded layout.
struct GeneratorModel {
  FittedEncoder enc;
  VaeConfig config;
  Mlp encoder_net;                    // D -> 2 * latent (mean, log-variance)
  Mlp decoder_net;                    // latent -> D
  std::vector<double> dec_log_sigma;  // one per continuous column, in [-5, 5]
  std::vector<double> loss_history;   // per-epoch mean negative ELBO

  // Prediction-head baseline (absent for plain fit_vae).
  std::optional<Mlp> head;
  double head_alpha = 0.0;
  std::string head_target;
  std::vector<double> pred_loss_history;

  std::size_t latent_dim() const { return config.latent_dim; }

  /// Encoder forward: latent mean and log-variance (clamped to +-8).
  void encode_latent(const std::vector<double>& x_enc, std::vector<double>& mu,
                     std::vector<double>& log_var, Mlp::Cache* cache = nullptr) const;
};

/// current is trainable; reference is a frozen copy taken at fine-tune start.
struct PolicyPair {
  GeneratorModel current;
  GeneratorModel reference;
};

/// One conditional-generation episode x -> x_hat.
struct Episode {
  Row x_hat;
  std::vector<double> z;
  std::vector<double> eps_latent;  // reparameterization noise behind z
  double log_prob = 0.0;           // log p_dec(x_hat | z)
};

GeneratorModel fit_vae(const Dataset& data, const VaeConfig& config);

/// Table-4 baseline: total loss = ELBO + alpha * prediction loss, with a
/// 4-layer head [128, 128, 64, 32] from the latent code to the target.
GeneratorModel fit_vae_with_prediction_head(const Dataset& data,
                                            const std::string& target,
                                            double alpha,
                                            const VaeConfig& config);

Dataset sample(const GeneratorModel& model, std::size_t n, std::uint64_t seed);

Episode conditional_generate(const GeneratorModel& model, const Row& x, Rng& rng);
Episode conditional_generate(const GeneratorModel& model, const Row& x,
                             std::uint64_t seed);

/// log p_dec(x_hat | z) under the model's decoder; finite for all valid
/// inputs thanks to the log-sigma clamp.
double log_prob_under(const GeneratorModel& model, const std::vector<double>& z,
                      const Row& x_hat);

/// Per-record negative ELBO with fixed latent noise, and its analytic
/// gradients (accumulated when the pointers are non-null).
double elbo_loss_and_grad(const GeneratorModel& model,
                          const std::vector<double>& x_enc,
                          const std::vector<double>& eps,
                          std::vector<double>* g_enc, std::vector<double>* g_dec,
                          std::vector<double>* g_log_sigma);

/// log p_dec(x_hat | z(phi)) with z = mu(x) + sigma(x) * eps recomputed from
/// the model's encoder; accumulates coef * gradient into the given blocks.
/// This is the differentiable path the PPO surrogate ascends.
double policy_log_prob_and_grad(const GeneratorModel& model,
                                const std::vector<double>& x_enc,
                                const std::vector<double>& eps, const Row& x_hat,
                                double coef, std::vector<double>* g_enc,
                                std::vector<double>* g_dec,
                                std::vector<double>* g_log_sigma);

std::string checkpoint_to_json(const GeneratorModel& model);
GeneratorModel checkpoint_from_json(const std::string& json_text);
void save_checkpoint(const GeneratorModel& model, const std::string& path);
GeneratorModel load_checkpoint(const std::string& path);

}  // namespace synrl
