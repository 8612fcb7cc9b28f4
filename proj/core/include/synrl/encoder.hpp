#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "synrl/schema.hpp"

namespace synrl {

/// Row-major dense matrix of encoded rows.
struct EncodedMatrix {
  std::size_t n_rows = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double* row(std::size_t r) { return values.data() + r * width; }
  const double* row(std::size_t r) const { return values.data() + r * width; }
};

/// Maps rows to the numeric feature space all distances, losses, and metrics
/// operate in: z-scored continuous cells and one-hot categorical blocks.
class FittedEncoder {
 public:
  struct ColumnLayout {
    ColumnKind kind;
    std::size_t offset;  // first encoded dimension of this column
    std::size_t width;   // 1 for continuous, #categories otherwise
    double mean = 0.0;   // continuous only
    double sd = 1.0;     // continuous only; floored at 1e-8
  };

  static FittedEncoder fit(const Dataset& data);

  /// Rebuilds an encoder from persisted statistics; cont_stats holds one
  /// (mean, sd) pair per continuous column, in schema order.
  static FittedEncoder from_stats(
      const TableSchema& schema,
      const std::vector<std::pair<double, double>>& cont_stats);

  std::size_t width() const { return width_; }
  const TableSchema& schema() const { return schema_; }
  const std::vector<ColumnLayout>& layout() const { return layout_; }

  std::vector<double> encode(const Row& row) const;
  /// Inverse of encode; arbitrary real vectors map each one-hot block to its
  /// argmax (ties -> lowest index) and un-z-score continuous entries.
  Row decode(const std::vector<double>& vec) const;

  EncodedMatrix encode_all(const Dataset& data) const;

 private:
  TableSchema schema_;
  std::vector<ColumnLayout> layout_;
  std::size_t width_ = 0;
};

}  // namespace synrl
