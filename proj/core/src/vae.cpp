#include "synrl/vae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synrl/errors.hpp"

namespace synrl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)
constexpr double kLogVarClamp = 8.0;
constexpr double kLogSigmaClamp = 5.0;

std::size_t count_continuous(const FittedEncoder& enc) {
  std::size_t n = 0;
  for (const auto& lay : enc.layout()) {
    if (lay.kind == ColumnKind::Continuous) ++n;
  }
  return n;
}

double log_sum_exp(const double* v, std::size_t n) {
  double hi = v[0];
  for (std::size_t i = 1; i < n; ++i) hi = std::max(hi, v[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(v[i] - hi);
  return hi + std::log(acc);
}

/// Splits the encoder net's raw output into mean and clamped log-variance;
/// gate[i] is false where the clamp is active (zero gradient).
void latent_stats(const std::vector<double>& raw, std::vector<double>& mu,
                  std::vector<double>& log_var, std::vector<bool>* gate) {
  const std::size_t latent = raw.size() / 2;
  mu.assign(raw.begin(), raw.begin() + latent);
  log_var.resize(latent);
  if (gate) gate->resize(latent);
  for (std::size_t i = 0; i < latent; ++i) {
    const double lv = raw[latent + i];
    const bool inside = lv > -kLogVarClamp && lv < kLogVarClamp;
    log_var[i] = std::clamp(lv, -kLogVarClamp, kLogVarClamp);
    if (gate) (*gate)[i] = inside;
  }
}

struct Grads {
  std::vector<double> enc, dec, log_sigma, head;
};

/// Negative log-likelihood of the encoded target x under the decoder output,
/// with gradients d(nll)/d(decoder output) and d(nll)/d(log sigma).
double recon_nll(const GeneratorModel& m, const std::vector<double>& x_enc,
                 const std::vector<double>& out, std::vector<double>* d_out,
                 std::vector<double>* d_log_sigma) {
  double nll = 0.0;
  std::size_t cont = 0;
  for (const auto& lay : m.enc.layout()) {
    if (lay.kind == ColumnKind::Continuous) {
      const double s = m.dec_log_sigma[cont];
      const double inv_var = std::exp(-2.0 * s);
      const double diff = x_enc[lay.offset] - out[lay.offset];
      nll += 0.5 * diff * diff * inv_var + s + kHalfLog2Pi;
      if (d_out) (*d_out)[lay.offset] += -diff * inv_var;
      if (d_log_sigma) (*d_log_sigma)[cont] += 1.0 - diff * diff * inv_var;
      ++cont;
    } else {
      std::size_t target = 0;
      for (std::size_t k = 1; k < lay.width; ++k) {
        if (x_enc[lay.offset + k] > x_enc[lay.offset + target]) target = k;
      }
      const double lse = log_sum_exp(out.data() + lay.offset, lay.width);
      nll += lse - out[lay.offset + target];
      if (d_out) {
        for (std::size_t k = 0; k < lay.width; ++k) {
          const double p = std::exp(out[lay.offset + k] - lse);
          (*d_out)[lay.offset + k] += p - (k == target ? 1.0 : 0.0);
        }
      }
    }
  }
  return nll;
}

/// One record's negative ELBO (plus optional alpha-weighted prediction loss)
/// with analytic gradients accumulated into g.
double elbo_record(const GeneratorModel& m, const std::vector<double>& x_enc,
                   const std::vector<double>& eps, Grads* g, double alpha,
                   std::size_t target_offset, std::size_t target_width,
                   double* pred_loss_out) {
  const std::size_t latent = m.latent_dim();
  Mlp::Cache enc_cache;
  const auto raw = m.encoder_net.forward(x_enc, g ? &enc_cache : nullptr);
  std::vector<double> mu, log_var;
  std::vector<bool> gate;
  latent_stats(raw, mu, log_var, g ? &gate : nullptr);

  std::vector<double> z(latent), half_sig(latent);
  for (std::size_t i = 0; i < latent; ++i) {
    half_sig[i] = std::exp(0.5 * log_var[i]);
    z[i] = mu[i] + half_sig[i] * eps[i];
  }

  Mlp::Cache dec_cache;
  const auto out = m.decoder_net.forward(z, g ? &dec_cache : nullptr);

  std::vector<double> d_out(out.size(), 0.0);
  double loss = recon_nll(m, x_enc, out, g ? &d_out : nullptr,
                          g ? &g->log_sigma : nullptr);

  double kl = 0.0;
  for (std::size_t i = 0; i < latent; ++i) {
    kl += 0.5 * (mu[i] * mu[i] + std::exp(log_var[i]) - 1.0 - log_var[i]);
  }
  loss += kl;

  std::vector<double> d_z(latent, 0.0);
  if (g) m.decoder_net.backward(dec_cache, d_out, g->dec, &d_z);

  // Prediction head: z -> target, loss added with weight alpha.
  if (m.head) {
    Mlp::Cache head_cache;
    const auto pred = m.head->forward(z, g ? &head_cache : nullptr);
    double pred_loss;
    std::vector<double> d_pred(pred.size(), 0.0);
    if (target_width == 1) {
      const double diff = pred[0] - x_enc[target_offset];
      pred_loss = diff * diff;
      d_pred[0] = 2.0 * diff;
    } else {
      std::size_t label = 0;
      for (std::size_t k = 1; k < target_width; ++k) {
        if (x_enc[target_offset + k] > x_enc[target_offset + label]) label = k;
      }
      const double lse = log_sum_exp(pred.data(), target_width);
      pred_loss = lse - pred[label];
      for (std::size_t k = 0; k < target_width; ++k) {
        d_pred[k] = std::exp(pred[k] - lse) - (k == label ? 1.0 : 0.0);
      }
    }
    if (pred_loss_out) *pred_loss_out = pred_loss;
    loss += alpha * pred_loss;
    if (g && alpha != 0.0) {
      for (auto& v : d_pred) v *= alpha;
      std::vector<double> d_z_head(latent, 0.0);
      m.head->backward(head_cache, d_pred, g->head, &d_z_head);
      for (std::size_t i = 0; i < latent; ++i) d_z[i] += d_z_head[i];
    }
  }

  if (g) {
    std::vector<double> d_raw(2 * latent, 0.0);
    for (std::size_t i = 0; i < latent; ++i) {
      d_raw[i] = d_z[i] + mu[i];  // reparameterization + KL
      if (gate[i]) {
        d_raw[latent + i] = d_z[i] * 0.5 * half_sig[i] * eps[i] +
                            0.5 * (std::exp(log_var[i]) - 1.0);
      }
    }
    m.encoder_net.backward(enc_cache, d_raw, g->enc, nullptr);
  }
  return loss;
}

GeneratorModel build_model(const Dataset& data, const VaeConfig& config) {
  config.validate();
  if (data.rows.empty()) throw ConfigError("cannot fit VAE on empty dataset");
  GeneratorModel m;
  m.enc = FittedEncoder::fit(data);
  m.config = config;
  const std::size_t d = m.enc.width();

  std::vector<std::size_t> enc_widths{d};
  enc_widths.insert(enc_widths.end(), config.encoder_hidden.begin(),
                    config.encoder_hidden.end());
  enc_widths.push_back(2 * config.latent_dim);
  m.encoder_net = Mlp(enc_widths);

  std::vector<std::size_t> dec_widths{config.latent_dim};
  dec_widths.insert(dec_widths.end(), config.decoder_hidden.begin(),
                    config.decoder_hidden.end());
  dec_widths.push_back(d);
  m.decoder_net = Mlp(dec_widths);

  m.dec_log_sigma.assign(count_continuous(m.enc), 0.0);
  return m;
}

void train(GeneratorModel& m, const Dataset& data) {
  Rng rng(m.config.seed);
  m.encoder_net.init(rng);
  m.decoder_net.init(rng);
  if (m.head) {
    Rng head_rng(Rng::mix(m.config.seed, 0x68656164));  // own stream
    m.head->init(head_rng);
  }

  std::size_t target_offset = 0, target_width = 0;
  if (m.head) {
    const auto t = m.enc.schema().column_index(m.head_target);
    target_offset = m.enc.layout()[t].offset;
    target_width = m.enc.layout()[t].width;
  }

  const EncodedMatrix enc_rows = m.enc.encode_all(data);
  const std::size_t n = data.n_rows();
  const std::size_t latent = m.latent_dim();

  Adam adam_enc(m.config.learning_rate), adam_dec(m.config.learning_rate);
  Adam adam_sig(m.config.learning_rate), adam_head(m.config.learning_rate);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  Grads g;
  std::vector<double> x_enc(m.enc.width()), eps(latent);
  for (std::size_t epoch = 0; epoch < m.config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0, epoch_pred = 0.0;
    for (std::size_t start = 0, batch_id = 0; start < n;
         start += m.config.batch_size, ++batch_id) {
      const std::size_t stop = std::min(n, start + m.config.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      g.enc.assign(m.encoder_net.n_params(), 0.0);
      g.dec.assign(m.decoder_net.n_params(), 0.0);
      g.log_sigma.assign(m.dec_log_sigma.size(), 0.0);
      if (m.head) g.head.assign(m.head->n_params(), 0.0);

      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const double* xr = enc_rows.row(order[i]);
        x_enc.assign(xr, xr + enc_rows.width);
        for (auto& e : eps) e = rng.normal();
        double pred_loss = 0.0;
        batch_loss += elbo_record(m, x_enc, eps, &g, m.head_alpha, target_offset,
                                  target_width, &pred_loss);
        epoch_pred += pred_loss;
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batch_id));
      }
      epoch_loss += batch_loss;
      for (auto& v : g.enc) v *= inv;
      for (auto& v : g.dec) v *= inv;
      for (auto& v : g.log_sigma) v *= inv;
      adam_enc.step(m.encoder_net.params(), g.enc);
      adam_dec.step(m.decoder_net.params(), g.dec);
      adam_sig.step(m.dec_log_sigma, g.log_sigma);
      if (m.head) {
        for (auto& v : g.head) v *= inv;
        adam_head.step(m.head->params(), g.head);
      }
      for (auto& s : m.dec_log_sigma) s = std::clamp(s, -kLogSigmaClamp, kLogSigmaClamp);
    }
    m.loss_history.push_back(epoch_loss / static_cast<double>(n));
    if (m.head) m.pred_loss_history.push_back(epoch_pred / static_cast<double>(n));
  }
}

}  // namespace

void VaeConfig::validate() const {
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  for (auto w : encoder_hidden) {
    if (w < 1) throw ConfigError("encoder hidden width must be >= 1");
  }
  for (auto w : decoder_hidden) {
    if (w < 1) throw ConfigError("decoder hidden width must be >= 1");
  }
}

void GeneratorModel::encode_latent(const std::vector<double>& x_enc,
                                   std::vector<double>& mu,
                                   std::vector<double>& log_var,
                                   Mlp::Cache* cache) const {
  const auto raw = encoder_net.forward(x_enc, cache);
  latent_stats(raw, mu, log_var, nullptr);
}

GeneratorModel fit_vae(const Dataset& data, const VaeConfig& config) {
  GeneratorModel m = build_model(data, config);
  train(m, data);
  return m;
}

GeneratorModel fit_vae_with_prediction_head(const Dataset& data,
                                            const std::string& target,
                                            double alpha,
                                            const VaeConfig& config) {
  GeneratorModel m = build_model(data, config);
  const auto t = m.enc.schema().column_index(target);
  const auto& lay = m.enc.layout()[t];
  const std::size_t out = lay.kind == ColumnKind::Continuous ? 1 : lay.width;
  m.head = Mlp({config.latent_dim, 128, 128, 64, 32, out});
  m.head_alpha = alpha;
  m.head_target = target;
  train(m, data);
  return m;
}

double log_prob_under(const GeneratorModel& model, const std::vector<double>& z,
                      const Row& x_hat) {
  if (z.size() != model.latent_dim()) throw DimensionError("log_prob_under: bad latent size");
  const auto out = model.decoder_net.forward(z);
  const auto x_enc = model.enc.encode(x_hat);
  return -recon_nll(model, x_enc, out, nullptr, nullptr);
}

double elbo_loss_and_grad(const GeneratorModel& model,
                          const std::vector<double>& x_enc,
                          const std::vector<double>& eps,
                          std::vector<double>* g_enc, std::vector<double>* g_dec,
                          std::vector<double>* g_log_sigma) {
  if (!g_enc && !g_dec && !g_log_sigma) {
    return elbo_record(model, x_enc, eps, nullptr, 0.0, 0, 0, nullptr);
  }
  Grads g;
  g.enc.assign(model.encoder_net.n_params(), 0.0);
  g.dec.assign(model.decoder_net.n_params(), 0.0);
  g.log_sigma.assign(model.dec_log_sigma.size(), 0.0);
  const double loss = elbo_record(model, x_enc, eps, &g, 0.0, 0, 0, nullptr);
  if (g_enc) {
    for (std::size_t i = 0; i < g.enc.size(); ++i) (*g_enc)[i] += g.enc[i];
  }
  if (g_dec) {
    for (std::size_t i = 0; i < g.dec.size(); ++i) (*g_dec)[i] += g.dec[i];
  }
  if (g_log_sigma) {
    for (std::size_t i = 0; i < g.log_sigma.size(); ++i) (*g_log_sigma)[i] += g.log_sigma[i];
  }
  return loss;
}

double policy_log_prob_and_grad(const GeneratorModel& model,
                                const std::vector<double>& x_enc,
                                const std::vector<double>& eps, const Row& x_hat,
                                double coef, std::vector<double>* g_enc,
                                std::vector<double>* g_dec,
                                std::vector<double>* g_log_sigma) {
  const std::size_t latent = model.latent_dim();
  const bool want_grad = g_enc || g_dec || g_log_sigma;

  Mlp::Cache enc_cache;
  const auto raw = model.encoder_net.forward(x_enc, want_grad ? &enc_cache : nullptr);
  std::vector<double> mu, log_var;
  std::vector<bool> gate;
  latent_stats(raw, mu, log_var, want_grad ? &gate : nullptr);
  std::vector<double> z(latent), half_sig(latent);
  for (std::size_t i = 0; i < latent; ++i) {
    half_sig[i] = std::exp(0.5 * log_var[i]);
    z[i] = mu[i] + half_sig[i] * eps[i];
  }

  Mlp::Cache dec_cache;
  const auto out = model.decoder_net.forward(z, want_grad ? &dec_cache : nullptr);
  const auto xh_enc = model.enc.encode(x_hat);

  // logp = -nll; flip the nll gradients and scale by coef.
  std::vector<double> d_out(out.size(), 0.0);
  std::vector<double> d_sig(model.dec_log_sigma.size(), 0.0);
  const double logp = -recon_nll(model, xh_enc, out, want_grad ? &d_out : nullptr,
                                 want_grad ? &d_sig : nullptr);
  if (!want_grad) return logp;

  for (auto& v : d_out) v *= -coef;
  if (g_log_sigma) {
    for (std::size_t i = 0; i < d_sig.size(); ++i) (*g_log_sigma)[i] += -coef * d_sig[i];
  }

  std::vector<double> d_z(latent, 0.0);
  std::vector<double> g_dec_local;
  std::vector<double>* dec_sink = g_dec;
  if (!dec_sink) {
    g_dec_local.assign(model.decoder_net.n_params(), 0.0);
    dec_sink = &g_dec_local;
  }
  model.decoder_net.backward(dec_cache, d_out, *dec_sink, g_enc ? &d_z : nullptr);

  if (g_enc) {
    std::vector<double> d_raw(2 * latent, 0.0);
    for (std::size_t i = 0; i < latent; ++i) {
      d_raw[i] = d_z[i];
      if (gate[i]) d_raw[latent + i] = d_z[i] * 0.5 * half_sig[i] * eps[i];
    }
    model.encoder_net.backward(enc_cache, d_raw, *g_enc, nullptr);
  }
  return logp;
}

Dataset sample(const GeneratorModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample: n must be >= 1");
  Rng rng(seed);
  const std::size_t latent = model.latent_dim();
  Dataset out{model.enc.schema(), {}};
  out.rows.reserve(n);
  std::vector<double> z(latent);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v = rng.normal();
    const auto dec = model.decoder_net.forward(z);
    Row row(model.enc.layout().size());
    std::size_t cont = 0;
    for (std::size_t c = 0; c < model.enc.layout().size(); ++c) {
      const auto& lay = model.enc.layout()[c];
      if (lay.kind == ColumnKind::Continuous) {
        const double enc_val =
            dec[lay.offset] + std::exp(model.dec_log_sigma[cont]) * rng.normal();
        row[c] = enc_val * lay.sd + lay.mean;
        ++cont;
      } else {
        const double lse = log_sum_exp(dec.data() + lay.offset, lay.width);
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = lay.width - 1;
        for (std::size_t k = 0; k < lay.width; ++k) {
          acc += std::exp(dec[lay.offset + k] - lse);
          if (u < acc) {
            pick = k;
            break;
          }
        }
        row[c] = static_cast<double>(pick);
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

Episode conditional_generate(const GeneratorModel& model, const Row& x, Rng& rng) {
  const auto x_enc = model.enc.encode(x);
  std::vector<double> mu, log_var;
  model.encode_latent(x_enc, mu, log_var);
  const std::size_t latent = model.latent_dim();

  Episode ep;
  ep.eps_latent.resize(latent);
  ep.z.resize(latent);
  for (std::size_t i = 0; i < latent; ++i) {
    ep.eps_latent[i] = rng.normal();
    ep.z[i] = mu[i] + std::exp(0.5 * log_var[i]) * ep.eps_latent[i];
  }

  const auto dec = model.decoder_net.forward(ep.z);
  Row row(model.enc.layout().size());
  std::size_t cont = 0;
  for (std::size_t c = 0; c < model.enc.layout().size(); ++c) {
    const auto& lay = model.enc.layout()[c];
    if (lay.kind == ColumnKind::Continuous) {
      const double enc_val =
          dec[lay.offset] + std::exp(model.dec_log_sigma[cont]) * rng.normal();
      row[c] = enc_val * lay.sd + lay.mean;
      ++cont;
    } else {
      const double lse = log_sum_exp(dec.data() + lay.offset, lay.width);
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t pick = lay.width - 1;
      for (std::size_t k = 0; k < lay.width; ++k) {
        acc += std::exp(dec[lay.offset + k] - lse);
        if (u < acc) {
          pick = k;
          break;
        }
      }
      row[c] = static_cast<double>(pick);
    }
  }
  ep.x_hat = std::move(row);
  // Scored through the same code path log_prob_under uses, so the two agree
  // bitwise (the RL zero-penalty identity depends on that).
  ep.log_prob = log_prob_under(model, ep.z, ep.x_hat);
  return ep;
}

Episode conditional_generate(const GeneratorModel& model, const Row& x,
                             std::uint64_t seed) {
  Rng rng(seed);
  return conditional_generate(model, x, rng);
}

namespace {

nlohmann::ordered_json mlp_to_json(const Mlp& net) {
  nlohmann::ordered_json j;
  j["widths"] = net.widths();
  j["values"] = net.params();
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("widths").get<std::vector<std::size_t>>());
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != net.n_params()) {
    throw SchemaError("checkpoint: parameter count mismatch");
  }
  net.params() = std::move(values);
  return net;
}

}  // namespace

std::string checkpoint_to_json(const GeneratorModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["schema"] = nlohmann::ordered_json::parse(schema_to_json(model.enc.schema()));
  auto stats = nlohmann::ordered_json::array();
  for (const auto& lay : model.enc.layout()) {
    if (lay.kind == ColumnKind::Continuous) {
      stats.push_back({{"mean", lay.mean}, {"sd", lay.sd}});
    }
  }
  j["encoder_stats"] = stats;
  j["config"] = {{"latent_dim", model.config.latent_dim},
                 {"encoder_hidden", model.config.encoder_hidden},
                 {"decoder_hidden", model.config.decoder_hidden},
                 {"epochs", model.config.epochs},
                 {"batch_size", model.config.batch_size},
                 {"learning_rate", model.config.learning_rate},
                 {"seed", model.config.seed}};
  j["encoder_net"] = mlp_to_json(model.encoder_net);
  j["decoder_net"] = mlp_to_json(model.decoder_net);
  j["dec_log_sigma"] = model.dec_log_sigma;
  if (model.head) {
    j["head"] = mlp_to_json(*model.head);
    j["head_alpha"] = model.head_alpha;
    j["head_target"] = model.head_target;
    j["pred_loss_history"] = model.pred_loss_history;
  }
  j["loss_history"] = model.loss_history;
  return j.dump(2) + "\n";
}

GeneratorModel checkpoint_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint parse failure: ") + e.what());
  }
  if (j.value("format_version", 0) != 1) {
    throw SchemaError("unsupported checkpoint format_version");
  }
  GeneratorModel m;
  const TableSchema schema = schema_from_json(j.at("schema").dump());
  std::vector<std::pair<double, double>> stats;
  for (const auto& s : j.at("encoder_stats")) {
    stats.emplace_back(s.at("mean").get<double>(), s.at("sd").get<double>());
  }
  m.enc = FittedEncoder::from_stats(schema, stats);
  const auto& cfg = j.at("config");
  m.config.latent_dim = cfg.at("latent_dim").get<std::size_t>();
  m.config.encoder_hidden = cfg.at("encoder_hidden").get<std::vector<std::size_t>>();
  m.config.decoder_hidden = cfg.at("decoder_hidden").get<std::vector<std::size_t>>();
  m.config.epochs = cfg.at("epochs").get<std::size_t>();
  m.config.batch_size = cfg.at("batch_size").get<std::size_t>();
  m.config.learning_rate = cfg.at("learning_rate").get<double>();
  m.config.seed = cfg.at("seed").get<std::uint64_t>();
  m.encoder_net = mlp_from_json(j.at("encoder_net"));
  m.decoder_net = mlp_from_json(j.at("decoder_net"));
  m.dec_log_sigma = j.at("dec_log_sigma").get<std::vector<double>>();
  if (j.contains("head")) {
    m.head = mlp_from_json(j.at("head"));
    m.head_alpha = j.at("head_alpha").get<double>();
    m.head_target = j.at("head_target").get<std::string>();
    m.pred_loss_history = j.at("pred_loss_history").get<std::vector<double>>();
  }
  m.loss_history = j.at("loss_history").get<std::vector<double>>();
  for (auto& s : m.dec_log_sigma) s = std::clamp(s, -kLogSigmaClamp, kLogSigmaClamp);
  return m;
}

void save_checkpoint(const GeneratorModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << checkpoint_to_json(model);
}

GeneratorModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace synrl
