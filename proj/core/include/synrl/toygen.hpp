#pragma once

#include <cstdint>
#include <vector>

#include "synrl/schema.hpp"

namespace synrl {

/// Recipe for a reproducible clinical-trial-shaped table: correlated
/// continuous vitals, binary adverse-event flags, and one target column with
/// a known dependency on the leading vitals.
struct ToyTrialSpec {
  std::size_t n_patients = 400;  // >= 50 for metric stability
  std::size_t n_continuous = 6;
  std::size_t n_binary_events = 3;
  bool binary_target = true;
  /// Linear-logit (binary) or linear-response (continuous) coefficients on
  /// the standardized leading vitals. All-zero makes the target independent
  /// of every feature.
  std::vector<double> target_coefficients = {2.5, -2.0};
  double noise = 0.5;  // >= 0
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic per spec/seed; both classes of every binary column are
/// guaranteed to appear.
Dataset generate_toy_trial(const ToyTrialSpec& spec);

}  // namespace synrl
