#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stereosnn {

// Writes `path` through a sibling temporary file and renames it into place,
// so readers never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_text_file(const std::filesystem::path& path);

// Splits a CSV line on commas. No quoting: none of our formats need it.
std::vector<std::string_view> split_csv(std::string_view line);

// Strict integer / real parsing of a whole field. Return false on garbage.
bool parse_int(std::string_view field, long long& out);
bool parse_real(std::string_view field, double& out);

// Shortest round-trippable decimal representation of `value`.
std::string format_real(double value);

}  // namespace stereosnn
