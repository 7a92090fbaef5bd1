#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sarbnn {

// Shortest form that round-trips a double exactly ("%.17g"); "inf"/"-inf".
std::string format_double(double v);
// Wraps a CSV field in double quotes (doubling inner quotes) when it holds
// a comma, quote or newline.
std::string csv_field(std::string_view v);

// Writes to "<path>.tmp" then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep);
std::vector<std::string> split_lines(std::string_view text);

double parse_double(std::string_view s, std::string_view context);
long long parse_int(std::string_view s, std::string_view context);

}  // namespace sarbnn
