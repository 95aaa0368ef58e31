#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace revisit {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Strict number parsing; throws ParseError (tagged with `line`) on trailing
// garbage or out-of-range input.
double parse_double(std::string_view text, std::size_t line = 0);
std::size_t parse_size(std::string_view text, std::size_t line = 0);
unsigned long long parse_u64(std::string_view text, std::size_t line = 0);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string_view> split_on(std::string_view line, char delimiter);

// Splits text into lines, dropping a trailing '\r' on each.
std::vector<std::string_view> split_lines(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace revisit
