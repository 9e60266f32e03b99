#pragma once

#include <string>
#include <string_view>

namespace sparqa {

// Strips ASCII whitespace from both ends.
std::string_view Trim(std::string_view s);

// Trims and turns every whitespace run into a single space.
std::string CollapseWhitespace(std::string_view s);

// Lower-case hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

}  // namespace sparqa
