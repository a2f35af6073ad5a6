#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gamelab {

// RFC 4180 quoting: fields containing a comma, quote or newline are quoted.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

// Parses a whole document; quoted fields may span lines. Throws DomainError
// on an unterminated quote.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

}  // namespace gamelab
