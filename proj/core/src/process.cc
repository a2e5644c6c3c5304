#include "trajbench/process.h"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <thread>

extern char** environ;

namespace trajbench {

namespace fs = std::filesystem;

bool executable_exists(const std::string& argv0) {
  if (argv0.empty()) return false;
  if (argv0.find('/') != std::string::npos) {
    return ::access(argv0.c_str(), X_OK) == 0 && !fs::is_directory(argv0);
  }
  const char* path_env = std::getenv("PATH");
  std::istringstream dirs(path_env ? path_env : "/usr/bin:/bin");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    const fs::path candidate = fs::path(dir.empty() ? "." : dir) / argv0;
    if (::access(candidate.c_str(), X_OK) == 0 && !fs::is_directory(candidate)) {
      return true;
    }
  }
  return false;
}

ProcessResult run_process(const std::vector<std::string>& argv,
                          const ProcessOptions& options) {
  ProcessResult result;
  if (argv.empty() || !executable_exists(argv.front())) {
    result.status = ProcessResult::Status::kNotFound;
    result.exit_code = -1;
    return result;
  }

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const std::string log =
      options.log_path ? options.log_path->string() : std::string("/dev/null");
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null",
                                   O_RDONLY, 0);
  if (options.working_directory) {
    posix_spawn_file_actions_addchdir_np(&actions,
                                         options.working_directory->c_str());
  }

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = -1;
  const int rc =
      posix_spawnp(&pid, cargv[0], &actions, &attr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    result.status = ProcessResult::Status::kNotFound;
    result.exit_code = -1;
    return result;
  }

  int wstatus = 0;
  bool timed_out = false;
  auto sleep_for = std::chrono::microseconds(200);
  while (true) {
    const pid_t w = ::waitpid(pid, &wstatus, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (options.timeout.count() > 0 &&
        std::chrono::steady_clock::now() - start >= options.timeout) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(sleep_for);
    sleep_for = std::min(sleep_for * 2, std::chrono::microseconds(20000));
  }
  // Reap anything the child left behind in its group.
  ::kill(-pid, SIGKILL);

  result.wall_time_s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (timed_out) {
    result.status = ProcessResult::Status::kTimedOut;
    result.exit_code = -1;
  } else if (WIFEXITED(wstatus)) {
    result.status = ProcessResult::Status::kExited;
    result.exit_code = WEXITSTATUS(wstatus);
  } else if (WIFSIGNALED(wstatus)) {
    result.status = ProcessResult::Status::kSignaled;
    result.exit_code = WTERMSIG(wstatus);
  }
  return result;
}

}  // namespace trajbench
