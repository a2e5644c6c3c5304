#pragma once

#include <filesystem>
#include <string>

namespace trajbench::testing {

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& text);

struct CliResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs `<exe> <args>` through the shell, optionally from `cwd`.
CliResult run_cli(const std::string& exe, const std::string& args,
                  const std::filesystem::path& cwd = {});

// Miniature TUM RGB-D sequence (four 640x480 frames, rgb.txt and
// groundtruth.txt) packed as <dir>/srv/freiburg1/rgbd_dataset_<seq>.tgz.
struct TumArchive {
  std::string sequence;
  std::filesystem::path archive;
  std::string base_url;  // file:// url of <dir>/srv
};
TumArchive make_tum_archive(const std::filesystem::path& dir,
                            const std::string& sequence = "freiburg1_xyz");

}  // namespace trajbench::testing
