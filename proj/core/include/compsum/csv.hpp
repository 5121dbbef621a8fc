#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace compsum::csv {

// Real number with 17 significant digits; "inf", "-inf", "nan" otherwise.
std::string format_real(double v);

// Quotes a field when it holds a comma, quote or line break.
std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Splits one record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> parse_row(std::string_view line);

// Reads one record, tolerating CRLF endings. Returns false at end of input.
bool read_row(std::istream& in, std::vector<std::string>& fields);

double parse_real(const std::string& field);

}  // namespace compsum::csv
