#pragma once

#include <stdexcept>
#include <string>

namespace bagoft {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingColumnError : public Error {
 public:
  explicit MissingColumnError(const std::string& name)
      : Error("missing column '" + name + "'"), column_(name) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace bagoft
