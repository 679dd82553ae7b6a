#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ecgbench {

// Splits one CSV line. Supports double-quoted fields with "" escapes; no
// embedded newlines. Throws ParseError on an unterminated quote.
std::vector<std::string> split_csv_line(std::string_view line);

// Reads a whole CSV file; blank lines are skipped, trailing \r stripped.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

// Strict full-string numeric parses; throw ParseError on anything else.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace ecgbench
