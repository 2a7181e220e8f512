#pragma once

#include <string>
#include <string_view>

namespace zoopose {

std::string lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
/// Lowercase ASCII alphanumerics joined by single underscores.
std::string slug(std::string_view s);
/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace zoopose
