#include "synrl/schema.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

namespace synrl {

void TableSchema::validate() const {
  if (columns.empty()) throw SchemaError("schema has no columns");
  std::unordered_set<std::string> names;
  int n_targets = 0;
  for (const auto& col : columns) {
    if (!names.insert(col.name).second) {
      throw SchemaError("duplicate column name: " + col.name);
    }
    if (col.target_role == TargetRole::Target) ++n_targets;
    if (col.kind == ColumnKind::Categorical) {
      if (col.categories.size() < 2) {
        throw SchemaError("categorical column " + col.name +
                          " needs at least 2 categories");
      }
      std::unordered_set<std::string> cats(col.categories.begin(),
                                           col.categories.end());
      if (cats.size() != col.categories.size()) {
        throw SchemaError("duplicate categories in column " + col.name);
      }
    } else if (!col.categories.empty()) {
      throw SchemaError("continuous column " + col.name + " lists categories");
    }
  }
  if (n_targets > 1) throw SchemaError("more than one Target column");
}

std::size_t TableSchema::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw SchemaError("no such column: " + name);
}

std::optional<std::size_t> TableSchema::target_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].target_role == TargetRole::Target) return i;
  }
  return std::nullopt;
}

void Dataset::validate() const {
  schema.validate();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.columns.size()) {
      throw SchemaError("row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(schema.columns.size()));
    }
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const auto& col = schema.columns[c];
      if (col.kind == ColumnKind::Categorical) {
        double v = rows[r][c];
        if (v != static_cast<double>(static_cast<long>(v)) || v < 0 ||
            v >= static_cast<double>(col.categories.size())) {
          throw SchemaError("row " + std::to_string(r) + " column " + col.name +
                            ": invalid category index");
        }
      }
    }
  }
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  const std::size_t n = data.n_rows();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw ConfigError("degenerate split: train size " + std::to_string(n_train) +
                      " of " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  Dataset train{data.schema, {}};
  Dataset test{data.schema, {}};
  train.rows.reserve(n_train);
  test.rows.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).rows.push_back(data.rows[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

namespace {

const char* kind_name(ColumnKind k) {
  return k == ColumnKind::Continuous ? "Continuous" : "Categorical";
}
const char* role_name(TargetRole r) {
  return r == TargetRole::Target ? "Target" : "Feature";
}

}  // namespace

std::string schema_to_json(const TableSchema& schema) {
  nlohmann::ordered_json j;
  j["version"] = schema.version;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& col : schema.columns) {
    nlohmann::ordered_json c;
    c["name"] = col.name;
    c["kind"] = kind_name(col.kind);
    if (col.kind == ColumnKind::Categorical) c["categories"] = col.categories;
    c["target_role"] = role_name(col.target_role);
    j["columns"].push_back(c);
  }
  return j.dump(2) + "\n";
}

TableSchema schema_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema JSON parse failure: ") + e.what());
  }
  TableSchema schema;
  schema.version = j.value("version", 1);
  for (const auto& c : j.at("columns")) {
    ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    if (kind == "Continuous") {
      col.kind = ColumnKind::Continuous;
    } else if (kind == "Categorical") {
      col.kind = ColumnKind::Categorical;
      col.categories = c.at("categories").get<std::vector<std::string>>();
    } else {
      throw SchemaError("unknown column kind: " + kind);
    }
    const auto role = c.value("target_role", std::string("Feature"));
    if (role == "Target") {
      col.target_role = TargetRole::Target;
    } else if (role == "Feature") {
      col.target_role = TargetRole::Feature;
    } else {
      throw SchemaError("unknown target_role: " + role);
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

void save_schema(const TableSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << schema_to_json(schema);
}

TableSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json(ss.str());
}

}  // namespace synrl
