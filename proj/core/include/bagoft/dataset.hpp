#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bagoft {

enum class ColumnKind { Continuous, Discrete };

std::string_view to_string(ColumnKind kind);

/// One covariate column. Continuous columns carry `values`; discrete columns
/// carry `labels` and, when every label parses as a number, `values` too
/// (otherwise `values` is empty).
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<double> values;
  std::vector<std::string> labels;

  bool has_numeric_values() const noexcept { return !values.empty(); }
};

/// Binary response plus named covariate columns, row-indexed.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string response_name, std::vector<int> response);

  std::size_t rows() const noexcept { return response_.size(); }
  const std::string& response_name() const noexcept { return response_name_; }
  const std::vector<int>& response() const noexcept { return response_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  void add_continuous(std::string name, std::vector<double> values);
  void add_discrete(std::string name, std::vector<std::string> labels);

  /// Throws MissingColumnError.
  const Column& column(std::string_view name) const;
  const Column* find(std::string_view name) const noexcept;
  bool has(std::string_view name) const noexcept { return find(name) != nullptr; }

  /// Names of all covariate columns of one kind, in insertion order.
  std::vector<std::string> names(ColumnKind kind) const;

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  std::size_t count_ones() const noexcept;

 private:
  void check_new_column(const std::string& name, std::size_t size) const;

  std::string response_name_ = "y";
  std::vector<int> response_;
  std::vector<Column> columns_;
};

}  // namespace bagoft
