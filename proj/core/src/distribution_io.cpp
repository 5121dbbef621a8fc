#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "compsum/csv.hpp"
#include "compsum/risk.hpp"

namespace compsum {

FiniteDistribution read_distribution_csv(std::istream& in) {
  std::vector<std::string> header;
  if (!csv::read_row(in, header)) throw std::invalid_argument("distribution csv: missing header");
  if (header.empty() || header[0] != "weight") {
    throw std::invalid_argument("distribution csv: header must start with 'weight'");
  }
  std::size_t n = 0;
  std::size_t d = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string expect_p = "p" + std::to_string(n + 1);
    const std::string expect_f = "f" + std::to_string(d + 1);
    if (d == 0 && header[i] == expect_p) {
      ++n;
    } else if (header[i] == expect_f) {
      ++d;
    } else {
      throw std::invalid_argument("distribution csv: unexpected column '" + header[i] + "'");
    }
  }
  if (n < 2) throw std::invalid_argument("distribution csv: need at least p1,p2");

  std::vector<SupportPoint> points;
  std::vector<std::string> row;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw std::invalid_argument("distribution csv line " + std::to_string(line) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    try {
      const double w = csv::parse_real(row[0]);
      std::vector<double> p(n), f(d);
      for (std::size_t i = 0; i < n; ++i) p[i] = csv::parse_real(row[1 + i]);
      for (std::size_t i = 0; i < d; ++i) f[i] = csv::parse_real(row[1 + n + i]);
      points.push_back({w, CondDist(std::move(p)), std::move(f)});
    } catch (const std::exception& e) {
      throw std::invalid_argument("distribution csv line " + std::to_string(line) + ": " +
                                  e.what());
    }
  }
  return FiniteDistribution(std::move(points));
}

void write_distribution_csv(std::ostream& out, const FiniteDistribution& dist) {
  std::vector<std::string> header{"weight"};
  for (std::size_t i = 0; i < dist.num_labels(); ++i) header.push_back("p" + std::to_string(i + 1));
  for (std::size_t i = 0; i < dist.feature_dim(); ++i) header.push_back("f" + std::to_string(i + 1));
  csv::write_row(out, header);
  for (const auto& pt : dist.points()) {
    std::vector<std::string> row{csv::format_real(pt.weight)};
    for (double v : pt.cond.probs()) row.push_back(csv::format_real(v));
    for (double v : pt.features) row.push_back(csv::format_real(v));
    csv::write_row(out, row);
  }
}

}  // namespace compsum
