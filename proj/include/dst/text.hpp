#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dst::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Trims and folds every whitespace run into a single space.
std::string collapse_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

std::string read_file(const std::filesystem::path& path);

// One entry per non-blank line, trimmed; lines starting with '#' are skipped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace dst::text
