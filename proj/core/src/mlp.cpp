#include "synrl/mlp.hpp"

#include <cmath>

#include "synrl/errors.hpp"

namespace synrl {

Mlp::Mlp(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("Mlp needs at least input and output widths");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 1 || widths_[l + 1] < 1) throw ConfigError("Mlp width < 1");
    layer_offsets_.push_back(total);
    total += widths_[l + 1] * widths_[l] + widths_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::init(Rng& rng) {
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t fan_in = widths_[l], fan_out = widths_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* w = params_.data() + layer_offsets_[l];
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) w[i] = rng.uniform(-limit, limit);
    for (std::size_t i = 0; i < fan_out; ++i) w[fan_out * fan_in + i] = 0.0;
  }
}

std::vector<double> Mlp::forward(const std::vector<double>& in, Cache* cache) const {
  if (in.size() != widths_.front()) throw DimensionError("Mlp::forward: input width mismatch");
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(in);
  }
  std::vector<double> cur = in;
  const std::size_t n_layers = widths_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t nin = widths_[l], nout = widths_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    const double* b = w + nout * nin;
    std::vector<double> next(nout);
    for (std::size_t i = 0; i < nout; ++i) {
      double acc = b[i];
      const double* wi = w + i * nin;
      for (std::size_t j = 0; j < nin; ++j) acc += wi[j] * cur[j];
      next[i] = (l + 1 < n_layers) ? std::tanh(acc) : acc;
    }
    cur = std::move(next);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

void Mlp::backward(const Cache& cache, const std::vector<double>& grad_out,
                   std::vector<double>& grad_params,
                   std::vector<double>* grad_in) const {
  const std::size_t n_layers = widths_.size() - 1;
  if (cache.acts.size() != n_layers + 1) throw DimensionError("Mlp::backward: stale cache");
  if (grad_params.size() != params_.size()) throw DimensionError("Mlp::backward: grad size mismatch");

  std::vector<double> delta = grad_out;  // d loss / d pre-activation (output layer is linear)
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t nin = widths_[l], nout = widths_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    double* gw = grad_params.data() + layer_offsets_[l];
    double* gb = gw + nout * nin;
    const auto& input = cache.acts[l];

    for (std::size_t i = 0; i < nout; ++i) {
      const double d = delta[i];
      gb[i] += d;
      double* gwi = gw + i * nin;
      for (std::size_t j = 0; j < nin; ++j) gwi[j] += d * input[j];
    }
    if (l == 0 && !grad_in) break;
    std::vector<double> prev(nin, 0.0);
    for (std::size_t i = 0; i < nout; ++i) {
      const double d = delta[i];
      const double* wi = w + i * nin;
      for (std::size_t j = 0; j < nin; ++j) prev[j] += d * wi[j];
    }
    if (l > 0) {
      // chain through tanh of the previous layer's output
      for (std::size_t j = 0; j < nin; ++j) {
        const double a = cache.acts[l][j];
        prev[j] *= 1.0 - a * a;
      }
      delta = std::move(prev);
    } else {
      *grad_in = std::move(prev);
    }
  }
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  if (grad.size() != params.size()) throw DimensionError("Adam::step: size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

}  // namespace synrl
