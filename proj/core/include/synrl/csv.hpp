#pragma once

#include <cstdint>
#include <string>

#include "synrl/schema.hpp"

namespace synrl {

/// Scans a headered CSV and types each column: Categorical iff non-numeric
/// or at most `distinct_threshold` distinct values, else Continuous.
/// Categories are sorted lexicographically. Constant columns are rejected.
TableSchema infer_schema(const std::string& csv_path, int distinct_threshold = 20);

/// Loads a CSV under a known schema; categorical cells become category
/// indices. Missing cells and unknown categories are errors.
Dataset load_csv(const std::string& csv_path, const TableSchema& schema);

/// Writes a CSV with a header row. Continuous cells use round-trip precision
/// so save/load is lossless and byte-deterministic.
void save_csv(const Dataset& data, const std::string& path);

}  // namespace synrl
