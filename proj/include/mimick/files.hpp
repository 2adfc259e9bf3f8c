#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mimick {

// Whole-file read; throws Error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over `path`, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace mimick
