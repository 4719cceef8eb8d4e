#pragma once

#include <filesystem>
#include <string>
#include <iosfwd>

#include "kquad/quadrature.hpp"

namespace kquad {

/// CSV with header `index,x_1,...,x_d,weight`, one node per line. Numbers use
/// the shortest representation that round-trips exactly.
void write_rule_csv(std::ostream& out, const QuadratureRule& rule);
void write_rule_csv(const std::filesystem::path& path, const QuadratureRule& rule);

/// Inverse of write_rule_csv; throws InputError on malformed input.
[[nodiscard]] QuadratureRule read_rule_csv(std::istream& in);
[[nodiscard]] QuadratureRule read_rule_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double value);

}  // namespace kquad
