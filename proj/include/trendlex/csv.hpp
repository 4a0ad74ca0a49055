#pragma once

#include <string>
#include <vector>

namespace trendlex::csv {

// RFC 4180 quoting: fields containing comma, quote, or newline get quoted,
// embedded quotes doubled.
std::string escape_field(const std::string& field);

std::string join_row(const std::vector<std::string>& fields);

// Parses one CSV document. Lines starting with '#' (outside of any quoted
// field) are comments and skipped; blank lines are skipped.
std::vector<std::vector<std::string>> parse(const std::string& text);

}  // namespace trendlex::csv
