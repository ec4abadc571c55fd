#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace blockpath::text {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Strict parse of the whole token; throws ParseError(line) on failure.
double parse_double(std::string_view token, int line);
long long parse_int(std::string_view token, int line);

// Whitespace tokenization; '#' starts a comment that runs to end of line.
std::vector<std::string> tokenize(std::string_view line);

std::vector<std::string> split_lines(std::string_view document);

// Whole-file I/O; failures throw IoError naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace blockpath::text
