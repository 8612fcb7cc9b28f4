#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace synrl {

enum class ColumnKind { Continuous, Categorical };
enum class TargetRole { Feature, Target };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<std::string> categories;  // Categorical only, canonical order
  TargetRole target_role = TargetRole::Feature;
};

/// Column order is canonical and preserved through every operation.
struct TableSchema {
  std::vector<ColumnSchema> columns;
  int version = 1;

  /// Throws SchemaError if names collide, a categorical column has fewer
  /// than 2 (or duplicate) categories, or more than one Target is declared.
  void validate() const;

  std::size_t column_index(const std::string& name) const;  // throws if absent
  std::optional<std::size_t> target_index() const;
};

/// A cell is a double: the raw value for Continuous columns, the category
/// index for Categorical columns.
using Row = std::vector<double>;

struct Dataset {
  TableSchema schema;
  std::vector<Row> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.columns.size(); }

  /// Checks row lengths and categorical index ranges; throws SchemaError.
  void validate() const;
};

/// Uniform shuffle by seed, then partition; train size = floor(fraction * n).
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

std::string schema_to_json(const TableSchema& schema);
TableSchema schema_from_json(const std::string& json_text);
void save_schema(const TableSchema& schema, const std::string& path);
TableSchema load_schema(const std::string& path);

}  // namespace synrl
