#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bagoft/dataset.hpp"
#include "bagoft/error.hpp"

namespace bagoft {

class CsvError : public Error {
 public:
  enum class Code { Io, Empty, Malformed, MissingColumn, NonBinaryResponse, MissingValue, BadType };

  CsvError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct CsvOptions {
  std::string response = "y";
  /// Columns typed as discrete even when numeric.
  std::vector<std::string> discrete;
  /// Columns required to be continuous (numeric).
  std::vector<std::string> continuous;
  /// Columns to drop.
  std::vector<std::string> ignore;
};

/// Reads a header-first CSV (RFC 4180 quoting). The response column is coerced
/// to 0/1 (accepts 0, 1, 0.0, 1.0, true, false). Other columns are continuous
/// when every value is numeric and discrete otherwise, unless overridden.
/// Empty cells and NA/NaN are missing values and are rejected with line numbers.
Dataset parse_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::istream& in, const CsvOptions& options = {});

/// Writes the response first, then covariates, with round-trip precision.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace bagoft
