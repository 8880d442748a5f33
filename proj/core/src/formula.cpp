#include "bagoft/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace bagoft {
namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    if (auto tilde = text_.find('~'); tilde != std::string_view::npos) {
      pos_ = tilde + 1;
    }
    std::vector<Term> terms;
    bool saw_term = false;
    do {
      skip_ws();
      if (peek() == '1' && !is_name_char(peek(1))) {
        ++pos_;
      } else {
        Term t = term();
        if (std::any_of(terms.begin(), terms.end(), [&](const Term& u) { return same_product(u, t); })) {
          throw FormulaError("duplicate term '" + t.label() + "'");
        }
        terms.push_back(std::move(t));
      }
      saw_term = true;
      skip_ws();
    } while (consume('+'));
    skip_ws();
    if (!saw_term || pos_ != text_.size()) fail("unexpected input");
    return Formula(std::move(terms));
  }

 private:
  // Factor order does not matter: x1*x2 and x2*x1 are the same term.
  static bool same_product(const Term& a, const Term& b) {
    auto key = [](const Term& t) {
      std::vector<std::pair<std::string, int>> k;
      for (const auto& f : t.factors) k.emplace_back(f.column, f.power);
      std::sort(k.begin(), k.end());
      return k;
    };
    return key(a) == key(b);
  }

  Term term() {
    Term t;
    do {
      skip_ws();
      Factor f = factor();
      auto it = std::find_if(t.factors.begin(), t.factors.end(),
                             [&](const Factor& g) { return g.column == f.column; });
      if (it != t.factors.end()) {
        it->power += f.power;
      } else {
        t.factors.push_back(std::move(f));
      }
      skip_ws();
    } while (consume('*') || consume(':'));
    return t;
  }

  Factor factor() {
    if (!is_name_start(peek())) fail("expected a column name");
    const std::size_t start = pos_;
    while (is_name_char(peek())) ++pos_;
    Factor f{std::string(text_.substr(start, pos_ - start)), 1};
    skip_ws();
    if (consume('^')) {
      skip_ws();
      const std::size_t num_start = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      int power = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + num_start, text_.data() + pos_, power);
      if (ec != std::errc{} || power < 1) fail("power must be a positive integer");
      f.power = power;
    }
    return f;
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void skip_ws() {
    while (std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormulaError("formula '" + std::string(text_) + "': " + what + " at offset " +
                       std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Term::label() const {
  std::string out;
  for (const auto& f : factors) {
    if (!out.empty()) out += '*';
    out += f.column;
    if (f.power != 1) out += '^' + std::to_string(f.power);
  }
  return out;
}

Formula::Formula(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.factors.empty()) throw FormulaError("empty term");
  }
}

Formula Formula::parse(std::string_view text) { return Parser(text).parse(); }

std::string Formula::canonical() const {
  if (terms_.empty()) return "1";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += " + ";
    out += t.label();
  }
  return out;
}

std::vector<std::string> Formula::coefficient_names() const {
  std::vector<std::string> out{"(Intercept)"};
  for (const auto& t : terms_) out.push_back(t.label());
  return out;
}

std::vector<std::string> Formula::columns() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) {
    for (const auto& f : t.factors) {
      if (std::find(out.begin(), out.end(), f.column) == out.end()) out.push_back(f.column);
    }
  }
  return out;
}

glm::DesignMatrix Formula::design(const Dataset& data) const {
  const auto n = static_cast<Eigen::Index>(data.rows());
  glm::DesignMatrix d{Eigen::MatrixXd::Ones(n, static_cast<Eigen::Index>(terms_.size() + 1)),
                      coefficient_names()};
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    auto col = d.x.col(static_cast<Eigen::Index>(j + 1));
    for (const auto& f : terms_[j].factors) {
      const Column& c = data.column(f.column);
      if (!c.has_numeric_values()) {
        throw FormulaError("column '" + f.column + "' is not numeric and cannot enter the formula");
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        col[i] *= std::pow(c.values[static_cast<std::size_t>(i)], f.power);
      }
    }
  }
  return d;
}

}  // namespace bagoft
