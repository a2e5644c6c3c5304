#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace trajbench {

// Fetches url into dest with libcurl (http, https and file schemes). An
// existing partial dest is resumed from its current size. Throws
// DatasetError(kDownloadFailed) naming the url and cause.
void download_file(const std::string& url, const std::filesystem::path& dest);

std::string sha256_hex(const std::filesystem::path& path);

// "<hex digest>  <filename>" per line, '#' comments allowed.
std::map<std::string, std::string> load_checksum_manifest(
    const std::filesystem::path& path);

// Throws DatasetError(kChecksumMismatch) if the manifest lists the file with
// a different digest. Files absent from the manifest pass.
void verify_checksum(const std::filesystem::path& manifest,
                     const std::filesystem::path& file);

}  // namespace trajbench
