#pragma once

#include <filesystem>
#include <string>

namespace formeval {

// Reads a whole file as bytes; throws LoadError when unreadable.
std::string read_text_file(const std::filesystem::path& path);

// Writes via a sibling temp file + rename so readers never observe partial
// content; creates parent directories. Throws LoadError on failure.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

} // namespace formeval
