#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bagoft/dataset.hpp"
#include "bagoft/error.hpp"
#include "bagoft/glm.hpp"

namespace bagoft {

class FormulaError : public Error {
 public:
  using Error::Error;
};

/// One factor of a term: a column raised to a positive integer power.
struct Factor {
  std::string column;
  int power = 1;
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// A product of factors, e.g. x1*x2 or x1^2.
struct Term {
  std::vector<Factor> factors;
  std::string label() const;
  friend bool operator==(const Term&, const Term&) = default;
};

/// Right-hand side of a logistic model: intercept plus main effects, products
/// and integer powers of named columns.
///
/// Grammar (whitespace ignored):
///   formula := [name "~"] ("1" | term ("+" term)*)
///   term    := factor (("*" | ":") factor)*
///   factor  := name ["^" positive-integer]
/// A "1" term is the intercept, which is always present. Repeated factors of
/// one column merge (x1*x1 == x1^2).
class Formula {
 public:
  Formula() = default;
  explicit Formula(std::vector<Term> terms);

  /// Throws FormulaError.
  static Formula parse(std::string_view text);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  /// Canonical text; parse(canonical()) reproduces this formula.
  std::string canonical() const;
  /// "(Intercept)" followed by term labels.
  std::vector<std::string> coefficient_names() const;
  /// Distinct referenced columns, in first-appearance order.
  std::vector<std::string> columns() const;

  /// Builds the design matrix. Throws MissingColumnError, or FormulaError for
  /// a discrete column without numeric labels.
  glm::DesignMatrix design(const Dataset& data) const;

  friend bool operator==(const Formula&, const Formula&) = default;

 private:
  std::vector<Term> terms_;
};

}  // namespace bagoft
