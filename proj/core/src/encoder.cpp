#include "synrl/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "synrl/errors.hpp"

namespace synrl {

FittedEncoder FittedEncoder::fit(const Dataset& data) {
  if (data.rows.empty()) throw ConfigError("cannot fit encoder on empty dataset");
  data.validate();

  FittedEncoder enc;
  enc.schema_ = data.schema;
  std::size_t offset = 0;
  const double n = static_cast<double>(data.n_rows());
  for (std::size_t c = 0; c < data.schema.columns.size(); ++c) {
    const auto& col = data.schema.columns[c];
    ColumnLayout lay;
    lay.kind = col.kind;
    lay.offset = offset;
    if (col.kind == ColumnKind::Continuous) {
      lay.width = 1;
      double sum = 0.0;
      for (const auto& row : data.rows) sum += row[c];
      lay.mean = sum / n;
      double ss = 0.0;
      for (const auto& row : data.rows) {
        const double d = row[c] - lay.mean;
        ss += d * d;
      }
      lay.sd = std::max(std::sqrt(ss / n), 1e-8);
    } else {
      lay.width = col.categories.size();
    }
    offset += lay.width;
    enc.layout_.push_back(lay);
  }
  enc.width_ = offset;
  return enc;
}

FittedEncoder FittedEncoder::from_stats(
    const TableSchema& schema,
    const std::vector<std::pair<double, double>>& cont_stats) {
  schema.validate();
  FittedEncoder enc;
  enc.schema_ = schema;
  std::size_t offset = 0, stat = 0;
  for (const auto& col : schema.columns) {
    ColumnLayout lay;
    lay.kind = col.kind;
    lay.offset = offset;
    if (col.kind == ColumnKind::Continuous) {
      lay.width = 1;
      if (stat >= cont_stats.size()) throw ConfigError("from_stats: too few stats");
      lay.mean = cont_stats[stat].first;
      lay.sd = std::max(cont_stats[stat].second, 1e-8);
      ++stat;
    } else {
      lay.width = col.categories.size();
    }
    offset += lay.width;
    enc.layout_.push_back(lay);
  }
  if (stat != cont_stats.size()) throw ConfigError("from_stats: too many stats");
  enc.width_ = offset;
  return enc;
}

std::vector<double> FittedEncoder::encode(const Row& row) const {
  if (row.size() != layout_.size()) {
    throw DimensionError("encode: row width mismatch");
  }
  std::vector<double> out(width_, 0.0);
  for (std::size_t c = 0; c < layout_.size(); ++c) {
    const auto& lay = layout_[c];
    if (lay.kind == ColumnKind::Continuous) {
      out[lay.offset] = (row[c] - lay.mean) / lay.sd;
    } else {
      const auto idx = static_cast<std::size_t>(row[c]);
      if (idx >= lay.width) throw DimensionError("encode: category index out of range");
      out[lay.offset + idx] = 1.0;
    }
  }
  return out;
}

Row FittedEncoder::decode(const std::vector<double>& vec) const {
  if (vec.size() != width_) throw DimensionError("decode: vector width mismatch");
  Row row(layout_.size());
  for (std::size_t c = 0; c < layout_.size(); ++c) {
    const auto& lay = layout_[c];
    if (lay.kind == ColumnKind::Continuous) {
      row[c] = vec[lay.offset] * lay.sd + lay.mean;
    } else {
      std::size_t best = 0;
      for (std::size_t k = 1; k < lay.width; ++k) {
        if (vec[lay.offset + k] > vec[lay.offset + best]) best = k;
      }
      row[c] = static_cast<double>(best);
    }
  }
  return row;
}

EncodedMatrix FittedEncoder::encode_all(const Dataset& data) const {
  EncodedMatrix m;
  m.n_rows = data.n_rows();
  m.width = width_;
  m.values.reserve(m.n_rows * m.width);
  for (const auto& row : data.rows) {
    auto v = encode(row);
    m.values.insert(m.values.end(), v.begin(), v.end());
  }
  return m;
}

}  // namespace synrl
