#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace kquad {

/// A `head:key=value,key=value` selector string as used for kernels,
/// sampling strategies, synthetic datasets and rate models.
struct OptionString {
  std::string head;
  std::map<std::string, std::string, std::less<>> options;

  [[nodiscard]] bool has(std::string_view key) const { return options.find(key) != options.end(); }
  /// Value for `key`, or InputError naming `context` when absent.
  [[nodiscard]] const std::string& at(std::string_view key, std::string_view context) const;
};

[[nodiscard]] OptionString parse_option_string(std::string_view text);

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;

/// Strict numeric parsing: the whole token must be consumed. Failures throw
/// InputError mentioning `what`.
[[nodiscard]] double parse_double(std::string_view token, std::string_view what);
[[nodiscard]] std::int64_t parse_int(std::string_view token, std::string_view what);
[[nodiscard]] std::uint64_t parse_uint(std::string_view token, std::string_view what);
[[nodiscard]] bool parse_bool(std::string_view token, std::string_view what);

}  // namespace kquad
