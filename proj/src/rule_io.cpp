#include "kquad/rule_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kquad/errors.hpp"
#include "kquad/options.hpp"

namespace kquad {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw InputError("could not format a floating point value");
  return std::string(buf.data(), ptr);
}

void write_rule_csv(std::ostream& out, const QuadratureRule& rule) {
  if (rule.nodes.cols() != rule.weights.size()) throw InputError("write_rule_csv: node and weight counts differ");
  const bool has_sources = rule.source_indices.size() == static_cast<std::size_t>(rule.size());
  out << "index";
  for (Eigen::Index k = 0; k < rule.nodes.rows(); ++k) out << ",x_" << (k + 1);
  out << ",weight\n";
  for (Eigen::Index j = 0; j < rule.size(); ++j) {
    out << (has_sources ? rule.source_indices[static_cast<std::size_t>(j)] : static_cast<std::size_t>(j));
    for (Eigen::Index k = 0; k < rule.nodes.rows(); ++k) out << ',' << format_double(rule.nodes(k, j));
    out << ',' << format_double(rule.weights[j]) << '\n';
  }
}

void write_rule_csv(const std::filesystem::path& path, const QuadratureRule& rule) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  write_rule_csv(out, rule);
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

QuadratureRule read_rule_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("rule CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  for (std::size_t pos = 0;;) {
    const auto comma = line.find(',', pos);
    header.emplace_back(trim(std::string_view(line).substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (header.size() < 3 || header.front() != "index" || header.back() != "weight") {
    throw InputError("rule CSV header must be index,x_1,...,x_d,weight");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 2);

  std::vector<std::size_t> indices;
  std::vector<double> coords;
  std::vector<double> weights;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    for (std::size_t pos = 0;;) {
      const auto comma = line.find(',', pos);
      cells.push_back(std::string_view(line).substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != header.size()) {
      throw InputError("rule CSV line " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                       " fields");
    }
    indices.push_back(parse_uint(cells.front(), "node index on line " + std::to_string(row)));
    for (Eigen::Index k = 0; k < d; ++k) {
      coords.push_back(parse_double(cells[static_cast<std::size_t>(k + 1)], "coordinate on line " + std::to_string(row)));
    }
    weights.push_back(parse_double(cells.back(), "weight on line " + std::to_string(row)));
  }
  if (weights.empty()) throw InputError("rule CSV has no nodes");

  QuadratureRule rule;
  const auto m = static_cast<Eigen::Index>(weights.size());
  rule.nodes = Eigen::Map<const Eigen::MatrixXd>(coords.data(), d, m);
  rule.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), m);
  rule.source_indices = std::move(indices);
  return rule;
}

QuadratureRule read_rule_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_rule_csv(in);
}

}  // namespace kquad
