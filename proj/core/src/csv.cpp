#include "compsum/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace compsum::csv {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << "\r\n";
}

std::vector<std::string> parse_row(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

bool read_row(std::istream& in, std::vector<std::string>& fields) {
  std::string line;
  if (!std::getline(in, line)) return false;
  // Quoted fields may span lines.
  auto open_quotes = [](const std::string& s) {
    std::size_t q = 0;
    for (char c : s) q += c == '"';
    return q % 2 == 1;
  };
  while (open_quotes(line)) {
    std::string more;
    if (!std::getline(in, more)) break;
    line += '\n';
    line += more;
  }
  fields = parse_row(line);
  return true;
}

double parse_real(const std::string& field) {
  const char* b = field.data();
  const char* e = b + field.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  std::string trimmed(b, e);
  if (trimmed == "inf") return INFINITY;
  if (trimmed == "-inf") return -INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
  if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
    throw std::invalid_argument("csv: not a number: '" + field + "'");
  }
  return v;
}

}  // namespace compsum::csv
