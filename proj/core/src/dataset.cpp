#include "bagoft/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "bagoft/error.hpp"

namespace bagoft {

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::Continuous ? "continuous" : "discrete";
}

Dataset::Dataset(std::string response_name, std::vector<int> response)
    : response_name_(std::move(response_name)), response_(std::move(response)) {
  for (std::size_t i = 0; i < response_.size(); ++i) {
    if (response_[i] != 0 && response_[i] != 1) {
      throw Error("response value at row " + std::to_string(i + 1) + " is not 0 or 1");
    }
  }
}

void Dataset::check_new_column(const std::string& name, std::size_t size) const {
  if (name.empty()) throw Error("column name must not be empty");
  if (name == response_name_) throw Error("column '" + name + "' clashes with the response");
  if (has(name)) throw Error("duplicate column '" + name + "'");
  if (size != rows()) {
    throw DimensionError("column '" + name + "' has " + std::to_string(size) +
                         " rows, dataset has " + std::to_string(rows()));
  }
}

void Dataset::add_continuous(std::string name, std::vector<double> values) {
  check_new_column(name, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error("column '" + name + "' has a non-finite value at row " + std::to_string(i + 1));
    }
  }
  columns_.push_back(Column{std::move(name), ColumnKind::Continuous, std::move(values), {}});
}

void Dataset::add_discrete(std::string name, std::vector<std::string> labels) {
  check_new_column(name, labels.size());
  std::vector<double> values;
  values.reserve(labels.size());
  for (const auto& label : labels) {
    double v = 0.0;
    const auto* end = label.data() + label.size();
    auto [ptr, ec] = std::from_chars(label.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
      values.clear();
      break;
    }
    values.push_back(v);
  }
  columns_.push_back(
      Column{std::move(name), ColumnKind::Discrete, std::move(values), std::move(labels)});
}

const Column* Dataset::find(std::string_view name) const noexcept {
  auto it = std::find_if(columns_.begin(), columns_.end(),
                         [&](const Column& c) { return c.name == name; });
  return it == columns_.end() ? nullptr : &*it;
}

const Column& Dataset::column(std::string_view name) const {
  if (const Column* c = find(name)) return *c;
  throw MissingColumnError(std::string(name));
}

std::vector<std::string> Dataset::names(ColumnKind kind) const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.kind == kind) out.push_back(c.name);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.response_name_ = response_name_;
  out.response_.reserve(rows.size());
  for (auto r : rows) out.response_.push_back(response_.at(r));
  out.columns_.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column sub{c.name, c.kind, {}, {}};
    if (c.has_numeric_values()) {
      sub.values.reserve(rows.size());
      for (auto r : rows) sub.values.push_back(c.values[r]);
    }
    if (!c.labels.empty()) {
      sub.labels.reserve(rows.size());
      for (auto r : rows) sub.labels.push_back(c.labels[r]);
    }
    out.columns_.push_back(std::move(sub));
  }
  return out;
}

std::size_t Dataset::count_ones() const noexcept {
  return static_cast<std::size_t>(std::count(response_.begin(), response_.end(), 1));
}

}  // namespace bagoft
