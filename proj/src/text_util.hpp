#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace surfacegrid {

/// Shortest decimal form that parses back to the identical double.
std::string format_real(double value);

std::vector<std::string> split_ws(std::string_view line);
std::vector<std::string> split(std::string_view text, char sep);

double parse_real(std::string_view token, const std::string& source, int line,
                  const std::string& field);
std::int64_t parse_int(std::string_view token, const std::string& source, int line,
                       const std::string& field);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, so readers never see a torn file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace surfacegrid
