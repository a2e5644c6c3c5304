#include "trajbench/fs_util.h"

#include <fmt/format.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "trajbench/error.h"

namespace trajbench {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::kData,
                fmt::format("cannot read '{}'", path.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp =
      path.parent_path() /
      fmt::format(".{}.tmp{}", path.filename().string(), ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCategory::kData,
                  fmt::format("cannot write '{}'", path.string()));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw Error(ErrorCategory::kData,
                  fmt::format("short write to '{}'", path.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCategory::kData,
                fmt::format("cannot replace '{}'", path.string()));
  }
}

void ensure_writable_directory(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) {
    throw Error(ErrorCategory::kConfiguration,
                fmt::format("cannot create directory '{}': {}", path.string(),
                            ec ? ec.message() : "not a directory"));
  }
  if (::access(path.c_str(), W_OK) != 0) {
    throw Error(ErrorCategory::kConfiguration,
                fmt::format("directory '{}' is not writable", path.string()));
  }
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace trajbench
