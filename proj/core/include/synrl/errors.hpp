#pragma once

#include <stdexcept>
#include <string>

namespace synrl {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// A column whose values are all identical; rejected at schema inference.
class ConstantColumnError : public Error {
 public:
  explicit ConstantColumnError(const std::string& column)
      : Error("constant column: " + column), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Non-finite loss/objective during training, with location diagnostic.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace synrl
