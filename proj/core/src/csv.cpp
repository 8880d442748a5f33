#include "bagoft/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bagoft {
namespace {

using Code = CsvError::Code;

std::string line_ref(std::size_t line) { return "line " + std::to_string(line); }

// Splits one logical record; quoted fields may span physical lines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string raw;
  if (!std::getline(in, raw)) return false;
  ++line;
  const std::size_t start_line = line;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == raw.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) {
          throw CsvError(Code::Malformed, "unterminated quoted field starting at " +
                                              line_ref(start_line));
        }
        ++line;
        field += '\n';
        raw += '\n' + more;
        continue;
      }
      break;
    }
    const char c = raw[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < raw.size() && raw[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else if (c != '\n') {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty() || was_quoted) {
        throw CsvError(Code::Malformed, "stray quote in " + line_ref(line));
      }
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\r' && i + 1 == raw.size()) {
      // CRLF line ending
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "N/A";
}

bool parse_number(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  std::vector<std::string> header;
  std::size_t line = 0;
  if (!read_record(in, header, line) || (header.size() == 1 && trim(header[0]).empty())) {
    throw CsvError(Code::Empty, "CSV input is empty (no header row)");
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  for (auto& h : header) h = trim(h);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) {
      throw CsvError(Code::Malformed, "empty column name at position " + std::to_string(j + 1));
    }
    if (std::count(header.begin(), header.end(), header[j]) > 1) {
      throw CsvError(Code::Malformed, "duplicate column name '" + header[j] + "'");
    }
  }
  const auto response_it = std::find(header.begin(), header.end(), options.response);
  if (response_it == header.end()) {
    throw CsvError(Code::MissingColumn, "response column '" + options.response + "' not in header");
  }
  for (const auto* list : {&options.discrete, &options.continuous, &options.ignore}) {
    for (const auto& name : *list) {
      if (!contains(header, name)) {
        throw CsvError(Code::MissingColumn, "column '" + name + "' not in header");
      }
    }
  }
  const auto response_col = static_cast<std::size_t>(response_it - header.begin());

  std::vector<std::vector<std::string>> cells(header.size());
  std::vector<std::size_t> line_of_row;
  std::vector<std::string> missing_rows;
  std::vector<std::string> fields;
  while (true) {
    std::size_t start = line + 1;
    if (!read_record(in, fields, line)) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw CsvError(Code::Malformed, line_ref(start) + " has " + std::to_string(fields.size()) +
                                          " fields, header has " + std::to_string(header.size()));
    }
    bool row_missing = false;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      std::string v = trim(std::move(fields[j]));
      if (!contains(options.ignore, header[j]) && is_missing(v)) row_missing = true;
      cells[j].push_back(std::move(v));
    }
    if (row_missing) missing_rows.push_back(std::to_string(start));
    line_of_row.push_back(start);
  }
  if (line_of_row.empty()) throw CsvError(Code::Empty, "CSV input has a header but no data rows");
  if (!missing_rows.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing_rows.size() && i < 10; ++i) {
      list += (i ? ", " : "") + missing_rows[i];
    }
    if (missing_rows.size() > 10) list += ", ...";
    throw CsvError(Code::MissingValue, std::to_string(missing_rows.size()) +
                                           " row(s) with missing values at line(s) " + list);
  }

  std::vector<int> y;
  y.reserve(line_of_row.size());
  for (std::size_t i = 0; i < line_of_row.size(); ++i) {
    std::string v = cells[response_col][i];
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    double num = 0.0;
    if (v == "true") {
      y.push_back(1);
    } else if (v == "false") {
      y.push_back(0);
    } else if (parse_number(v, num) && (num == 0.0 || num == 1.0)) {
      y.push_back(static_cast<int>(num));
    } else {
      throw CsvError(Code::NonBinaryResponse, "response '" + options.response + "' at " +
                                                  line_ref(line_of_row[i]) + " is '" +
                                                  cells[response_col][i] + "', expected 0 or 1");
    }
  }

  Dataset data(options.response, std::move(y));
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == response_col || contains(options.ignore, header[j])) continue;
    std::vector<double> values;
    values.reserve(cells[j].size());
    std::size_t bad = cells[j].size();
    for (std::size_t i = 0; i < cells[j].size(); ++i) {
      double v = 0.0;
      if (!parse_number(cells[j][i], v)) {
        bad = i;
        break;
      }
      values.push_back(v);
    }
    const bool numeric = bad == cells[j].size();
    if (contains(options.continuous, header[j]) && !numeric) {
      throw CsvError(Code::BadType, "column '" + header[j] + "' forced continuous but " +
                                        line_ref(line_of_row[bad]) + " has '" + cells[j][bad] +
                                        "'");
    }
    if (numeric && !contains(options.discrete, header[j])) {
      data.add_continuous(header[j], std::move(values));
    } else {
      data.add_discrete(header[j], std::move(cells[j]));
    }
  }
  return data;
}

Dataset parse_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(Code::Io, "cannot open '" + path.string() + "'");
  return parse_csv(in, options);
}

void write_csv(const Dataset& data, std::ostream& out) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + '"';
  };
  out << quote(data.response_name());
  for (const auto& c : data.columns()) out << ',' << quote(c.name);
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << data.response()[i];
    for (const auto& c : data.columns()) {
      out << ',';
      if (c.kind == ColumnKind::Discrete) {
        out << quote(c.labels[i]);
      } else {
        out << format_double(c.values[i]);
      }
    }
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError(Code::Io, "cannot write '" + path.string() + "'");
  write_csv(data, out);
}

}  // namespace bagoft
