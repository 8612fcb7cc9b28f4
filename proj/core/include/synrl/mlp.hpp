#pragma once

#include <cstddef>
#include <vector>

#include "synrl/rng.hpp"

namespace synrl {

/// Fully connected network with tanh hidden activations and a linear output
/// layer. Parameters live in one flat vector (per layer: row-major weight
/// matrix, then bias) so optimizers, serialization, and finite-difference
/// checks all see the same layout.
class Mlp {
 public:
  Mlp() = default;
  /// widths = [input, hidden..., output]
  explicit Mlp(std::vector<std::size_t> widths);

  void init(Rng& rng);  // uniform Glorot

  std::size_t n_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }

  struct Cache {
    // acts[0] is the input; acts[i] the post-activation output of layer i.
    std::vector<std::vector<double>> acts;
  };

  std::vector<double> forward(const std::vector<double>& in,
                              Cache* cache = nullptr) const;

  /// Accumulates d(loss)/d(params) into grad_params (must be n_params() long)
  /// given d(loss)/d(output); optionally emits d(loss)/d(input).
  void backward(const Cache& cache, const std::vector<double>& grad_out,
                std::vector<double>& grad_params,
                std::vector<double>* grad_in = nullptr) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<double> params_;
  std::vector<std::size_t> layer_offsets_;  // start of each layer's block
};

/// Adam with fixed hyperparameters; one instance per parameter block.
class Adam {
 public:
  explicit Adam(double lr) : lr_(lr) {}
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  double lr_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace synrl
