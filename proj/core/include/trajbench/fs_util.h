#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace trajbench {

// Throws Error(kData) when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// Creates the directory (and parents); throws Error(kConfiguration) naming
// the path if it cannot be created or is not writable.
void ensure_writable_directory(const std::filesystem::path& path);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

}  // namespace trajbench
