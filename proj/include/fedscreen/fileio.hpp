#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fedscreen::io {

// Reads a whole file; throws file_not_found.
std::string read_file(const std::filesystem::path& path);
// Writes bytes exactly, replacing any existing file; throws io_failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fedscreen::io
