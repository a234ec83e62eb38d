#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace conewalk {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Parses a full string as a double; throws conewalk::Error otherwise.
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);
bool parse_bool(std::string_view s);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

}  // namespace conewalk
