#include "synrl/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "synrl/errors.hpp"

namespace synrl {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  RawTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path);
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw IoError(path + ": row " + std::to_string(t.rows.size() + 1) +
                    " has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw IoError("no data rows in " + path);
  return t;
}

std::string format_cell(double v) {
  char buf[40];
  // Round-trip precision keeps save/load lossless; integers print bare.
  if (v == static_cast<double>(static_cast<long long>(v)) &&
      std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  }
  return buf;
}

}  // namespace

TableSchema infer_schema(const std::string& csv_path, int distinct_threshold) {
  const RawTable t = read_raw(csv_path);
  TableSchema schema;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    std::set<std::string> distinct;
    bool numeric = true;
    for (const auto& row : t.rows) {
      const std::string& cell = row[c];
      if (cell.empty()) {
        throw IoError(csv_path + ": missing cell in column " + t.header[c]);
      }
      distinct.insert(cell);
      double d;
      if (!parse_double(cell, d)) numeric = false;
    }
    if (distinct.size() < 2) throw ConstantColumnError(t.header[c]);
    ColumnSchema col;
    col.name = t.header[c];
    if (!numeric ||
        distinct.size() <= static_cast<std::size_t>(distinct_threshold)) {
      col.kind = ColumnKind::Categorical;
      col.categories.assign(distinct.begin(), distinct.end());  // lexicographic
    } else {
      col.kind = ColumnKind::Continuous;
    }
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

Dataset load_csv(const std::string& csv_path, const TableSchema& schema) {
  schema.validate();
  const RawTable t = read_raw(csv_path);
  if (t.header.size() != schema.columns.size()) {
    throw SchemaError(csv_path + ": header width " + std::to_string(t.header.size()) +
                      " does not match schema width " +
                      std::to_string(schema.columns.size()));
  }
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != schema.columns[c].name) {
      throw SchemaError(csv_path + ": header column '" + t.header[c] +
                        "' does not match schema column '" +
                        schema.columns[c].name + "'");
    }
  }
  std::vector<std::unordered_map<std::string, std::size_t>> cat_index(
      schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& col = schema.columns[c];
    for (std::size_t k = 0; k < col.categories.size(); ++k) {
      cat_index[c][col.categories[k]] = k;
    }
  }

  Dataset data{schema, {}};
  data.rows.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Row row(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const std::string& cell = t.rows[r][c];
      if (cell.empty()) {
        throw IoError(csv_path + ": missing cell at row " + std::to_string(r) +
                      " column " + schema.columns[c].name);
      }
      if (schema.columns[c].kind == ColumnKind::Continuous) {
        double v;
        if (!parse_double(cell, v)) {
          throw SchemaError(csv_path + ": non-numeric value '" + cell +
                            "' in continuous column " + schema.columns[c].name);
        }
        row[c] = v;
      } else {
        auto it = cat_index[c].find(cell);
        if (it == cat_index[c].end()) {
          throw SchemaError(csv_path + ": unknown category '" + cell +
                            "' in column " + schema.columns[c].name);
        }
        row[c] = static_cast<double>(it->second);
      }
    }
    data.rows.push_back(std::move(row));
  }
  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (std::size_t c = 0; c < data.schema.columns.size(); ++c) {
    if (c) out << ',';
    out << data.schema.columns[c].name;
  }
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      const auto& col = data.schema.columns[c];
      if (col.kind == ColumnKind::Categorical) {
        out << col.categories[static_cast<std::size_t>(row[c])];
      } else {
        out << format_cell(row[c]);
      }
    }
    out << '\n';
  }
}

}  // namespace synrl
