#include "synrl/toygen.hpp"

#include <cmath>
#include <string>

#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace synrl {

namespace {

constexpr double kFactorLoading = 0.6;  // shared-severity correlation strength

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void ToyTrialSpec::validate() const {
  if (n_patients < 50) throw ConfigError("n_patients must be >= 50");
  if (n_continuous == 0) throw ConfigError("n_continuous must be >= 1");
  if (target_coefficients.size() > n_continuous) {
    throw ConfigError("more target coefficients than continuous columns");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ConfigError("noise must be finite and >= 0");
  }
}

Dataset generate_toy_trial(const ToyTrialSpec& spec) {
  spec.validate();

  TableSchema schema;
  for (std::size_t j = 0; j < spec.n_continuous; ++j) {
    schema.columns.push_back({"vital_" + std::to_string(j + 1),
                              ColumnKind::Continuous, {}, TargetRole::Feature});
  }
  for (std::size_t j = 0; j < spec.n_binary_events; ++j) {
    schema.columns.push_back({"event_" + std::to_string(j + 1),
                              ColumnKind::Categorical, {"0", "1"},
                              TargetRole::Feature});
  }
  if (spec.binary_target) {
    schema.columns.push_back(
        {"outcome", ColumnKind::Categorical, {"0", "1"}, TargetRole::Target});
  } else {
    schema.columns.push_back(
        {"outcome", ColumnKind::Continuous, {}, TargetRole::Target});
  }
  schema.validate();

  Rng rng(spec.seed);
  Dataset data{schema, {}};
  data.rows.reserve(spec.n_patients);
  for (std::size_t i = 0; i < spec.n_patients; ++i) {
    Row row;
    row.reserve(schema.columns.size());

    const double severity = rng.normal();  // shared latent factor
    std::vector<double> z_vitals(spec.n_continuous);
    for (std::size_t j = 0; j < spec.n_continuous; ++j) {
      const double z = kFactorLoading * severity +
                       std::sqrt(1.0 - kFactorLoading * kFactorLoading) * rng.normal();
      z_vitals[j] = z;
      // clinically-flavored offsets/scales so columns are not identical
      const double mean = 70.0 + 8.0 * static_cast<double>(j);
      const double sd = 5.0 + static_cast<double>(j);
      row.push_back(mean + sd * z);
    }
    for (std::size_t j = 0; j < spec.n_binary_events; ++j) {
      const double p =
          sigmoid(0.9 * severity - 0.4 - 0.3 * static_cast<double>(j));
      row.push_back(rng.uniform() < p ? 1.0 : 0.0);
    }

    double signal = 0.0;
    for (std::size_t k = 0; k < spec.target_coefficients.size(); ++k) {
      signal += spec.target_coefficients[k] * z_vitals[k];
    }
    const double response = signal + spec.noise * rng.normal();
    row.push_back(spec.binary_target ? (response > 0.0 ? 1.0 : 0.0) : response);
    data.rows.push_back(std::move(row));
  }

  // Guarantee both classes of every binary column (constant columns break
  // schema inference and the downstream metrics).
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].kind != ColumnKind::Categorical) continue;
    bool saw[2] = {false, false};
    for (const auto& row : data.rows) saw[row[c] > 0.5 ? 1 : 0] = true;
    if (!saw[0]) data.rows[0][c] = 0.0;
    if (!saw[1]) data.rows[1][c] = 1.0;
  }

  data.validate();
  return data;
}

}  // namespace synrl
