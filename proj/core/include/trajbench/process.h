#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trajbench {

struct ProcessResult {
  enum class Status { kExited, kSignaled, kTimedOut, kNotFound };

  Status status = Status::kExited;
  int exit_code = 0;  // exit status, signal number, or -1
  double wall_time_s = 0.0;
};

struct ProcessOptions {
  // stdout and stderr both go here (truncated); /dev/null when unset.
  std::optional<std::filesystem::path> log_path;
  std::optional<std::filesystem::path> working_directory;
  std::chrono::milliseconds timeout{0};  // 0 = no limit
};

// Spawns argv[0] (searched on PATH) in its own process group. On timeout the
// whole group is killed with SIGKILL.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& options = {});

// True if argv0 names an executable file, directly or via PATH.
bool executable_exists(const std::string& argv0);

}  // namespace trajbench
