#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "synrl/schema.hpp"

namespace testutil {

/// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("synrl_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 2 continuous + 1 binary feature + binary target, hand-written rows.
inline synrl::Dataset tiny_dataset() {
  synrl::TableSchema schema;
  schema.columns = {
      {"age", synrl::ColumnKind::Continuous, {}, synrl::TargetRole::Feature},
      {"bp", synrl::ColumnKind::Continuous, {}, synrl::TargetRole::Feature},
      {"flag", synrl::ColumnKind::Categorical, {"no", "yes"},
       synrl::TargetRole::Feature},
      {"outcome", synrl::ColumnKind::Categorical, {"0", "1"},
       synrl::TargetRole::Target},
  };
  synrl::Dataset d{schema, {}};
  d.rows = {
      {33.0, 118.5, 0.0, 0.0}, {47.0, 131.0, 1.0, 1.0}, {29.0, 109.0, 0.0, 0.0},
      {56.0, 142.5, 1.0, 1.0}, {61.0, 150.0, 1.0, 1.0}, {38.0, 125.0, 0.0, 0.0},
      {44.0, 128.0, 1.0, 0.0}, {52.0, 137.5, 0.0, 1.0},
  };
  return d;
}

}  // namespace testutil
