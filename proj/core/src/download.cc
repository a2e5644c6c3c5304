#include "trajbench/download.h"

#include <curl/curl.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "trajbench/dataset.h"

namespace trajbench {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void download_failed(const std::string& url,
                                  const std::string& cause) {
  throw DatasetError(DatasetErrorKind::kDownloadFailed,
                     fmt::format("download of '{}' failed: {}", url, cause));
}

std::size_t write_to_file(char* data, std::size_t size, std::size_t nmemb,
                          void* user) {
  return std::fwrite(data, size, nmemb, static_cast<std::FILE*>(user));
}

void global_curl_init() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

}  // namespace

void download_file(const std::string& url, const fs::path& dest) {
  global_curl_init();
  std::error_code ec;
  const auto existing =
      fs::exists(dest, ec) ? static_cast<curl_off_t>(fs::file_size(dest, ec))
                           : curl_off_t{0};

  std::unique_ptr<std::FILE, decltype(&std::fclose)> file(
      std::fopen(dest.c_str(), existing > 0 ? "ab" : "wb"), &std::fclose);
  if (!file) download_failed(url, "cannot open " + dest.string());

  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(),
                                                           &curl_easy_cleanup);
  if (!curl) download_failed(url, "curl_easy_init failed");
  char errbuf[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_file);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, file.get());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, errbuf);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
  if (existing > 0) {
    curl_easy_setopt(curl.get(), CURLOPT_RESUME_FROM_LARGE, existing);
  }
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc == CURLE_RANGE_ERROR || rc == CURLE_BAD_DOWNLOAD_RESUME) {
    // Server cannot resume: restart from scratch once.
    file.reset();
    fs::remove(dest, ec);
    download_file(url, dest);
    return;
  }
  if (rc != CURLE_OK) {
    download_failed(url, errbuf[0] ? errbuf : curl_easy_strerror(rc));
  }
}

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DatasetError(DatasetErrorKind::kMalformedFile,
                       fmt::format("cannot read '{}'", path.string()));
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::map<std::string, std::string> load_checksum_manifest(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string digest, name;
    if (ss >> digest >> name) {
      if (!name.empty() && name.front() == '*') name.erase(0, 1);
      out[name] = digest;
    }
  }
  return out;
}

void verify_checksum(const fs::path& manifest, const fs::path& file) {
  if (!fs::exists(manifest)) return;
  const auto digests = load_checksum_manifest(manifest);
  const auto it = digests.find(file.filename().string());
  if (it == digests.end()) return;
  const std::string actual = sha256_hex(file);
  if (actual != it->second) {
    throw DatasetError(
        DatasetErrorKind::kChecksumMismatch,
        fmt::format("checksum mismatch for '{}': expected {}, got {}",
                    file.string(), it->second, actual));
  }
}

}  // namespace trajbench
