#include "kquad/options.hpp"

#include <charconv>
#include <system_error>

#include "kquad/errors.hpp"

namespace kquad {

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::string& OptionString::at(std::string_view key, std::string_view context) const {
  const auto it = options.find(key);
  if (it == options.end()) {
    throw InputError(std::string(context) + ": missing option '" + std::string(key) + "'");
  }
  return it->second;
}

OptionString parse_option_string(std::string_view text) {
  OptionString out;
  text = trim(text);
  const auto colon = text.find(':');
  out.head = std::string(trim(text.substr(0, colon)));
  if (out.head.empty()) throw InputError("empty selector in '" + std::string(text) + "'");
  if (colon == std::string_view::npos) return out;

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("expected key=value in '" + std::string(text) + "', got '" + std::string(item) + "'");
    }
    out.options.insert_or_assign(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::string_view what) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw InputError("invalid " + std::string(what) + ": '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

double parse_double(std::string_view token, std::string_view what) { return parse_number<double>(token, what); }
std::int64_t parse_int(std::string_view token, std::string_view what) { return parse_number<std::int64_t>(token, what); }
std::uint64_t parse_uint(std::string_view token, std::string_view what) {
  return parse_number<std::uint64_t>(token, what);
}

bool parse_bool(std::string_view token, std::string_view what) {
  token = trim(token);
  if (token == "true" || token == "1" || token == "yes" || token == "on") return true;
  if (token == "false" || token == "0" || token == "no" || token == "off") return false;
  throw InputError("invalid " + std::string(what) + ": '" + std::string(token) + "'");
}

}  // namespace kquad
