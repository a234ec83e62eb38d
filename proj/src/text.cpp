#include "conewalk/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

#include "conewalk/error.hpp"

namespace conewalk {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(trim(s.substr(start)));
      break;
    }
    parts.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw Error("not a number: '" + t + "'");
  }
  if (!std::isfinite(v)) throw Error("non-finite number: '" + t + "'");
  return v;
}

long long parse_integer(std::string_view s) {
  const std::string t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error("not an integer: '" + t + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error("not a boolean: '" + t + "'");
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf.data(), ptr);
}

}  // namespace conewalk
