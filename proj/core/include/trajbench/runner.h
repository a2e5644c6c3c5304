#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trajbench/dataset.h"
#include "trajbench/error.h"
#include "trajbench/experiment.h"

namespace trajbench {

enum class RunnerErrorKind { kExecutableNotFound, kManifest };

using RunnerError = KindedError<RunnerErrorKind, ErrorCategory::kExecution>;

namespace run_status {
inline constexpr const char* kOk = "ok";
inline constexpr const char* kFailed = "failed";
inline constexpr const char* kTimeout = "timeout";
inline constexpr const char* kMissingOutput = "missing_output";
inline constexpr const char* kNotFound = "not_found";
}  // namespace run_status

struct RunRecord {
  std::string exp_id;
  std::string method;
  std::string dataset;
  std::string sequence;
  std::size_t run_index = 0;
  ParameterMap parameters;  // effective
  std::filesystem::path trajectory_path;  // empty unless the run produced one
  int exit_code = 0;
  double wall_time_s = 0.0;
  std::filesystem::path log_path;
  std::string status = run_status::kOk;

  bool ok() const { return status == run_status::kOk; }
};

struct ExecuteOptions {
  std::optional<std::filesystem::path> rgb_csv;  // default: the layout's
  std::chrono::seconds timeout{1800};
  std::optional<std::uint64_t> harness_seed;
};

// Renders <exp_id>_settings.yaml, runs the method with the standard flags
// plus --exp_folder, and checks for <output_dir>/<exp_id>.txt. Failures are
// recorded in the returned record, never thrown.
RunRecord execute_run(const MethodSpec& method, const SequenceLayout& layout,
                      const std::string& exp_id, const ParameterMap& parameters,
                      const std::filesystem::path& output_dir,
                      const ExecuteOptions& options = {});

// Argument vector execute_run passes; exposed for tests.
std::vector<std::string> method_argv(const MethodSpec& method,
                                     const SequenceLayout& layout,
                                     const std::filesystem::path& rgb_csv,
                                     const std::string& exp_id,
                                     const std::filesystem::path& settings_yaml,
                                     const std::filesystem::path& output_dir);

struct RunnerOptions {
  const MethodRegistry* registry = nullptr;  // required
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::chrono::seconds timeout{1800};
  bool prepare_missing = true;  // build unprepared sequences via adapters
  std::function<void(const RunRecord&)> on_complete;  // coordinator thread
};

std::filesystem::path experiment_dir(const std::filesystem::path& root,
                                     const std::string& experiment);
std::filesystem::path run_output_dir(const std::filesystem::path& root,
                                     const std::string& experiment,
                                     const std::string& method,
                                     const std::string& dataset,
                                     const std::string& sequence);

// Per-run seed, a function of everything but the experiment size.
std::uint64_t harness_seed(std::uint64_t seed, const std::string& method,
                           const std::string& dataset,
                           const std::string& sequence, std::size_t run_index);

// Executes num_runs runs for every sequence (sequence-major exp_id counter)
// and writes runs.csv and run_parameters.csv under experiment_dir.
std::vector<RunRecord> run_experiment(const ExperimentConfig& experiment,
                                      const SequenceSet& sequences,
                                      const std::filesystem::path& root,
                                      const RunnerOptions& options);

inline constexpr const char* kRunsCsvHeader =
    "exp_id,method,dataset,sequence,run_index,exit_code,wall_time_s,"
    "trajectory_path,status";

// Paths are stored relative to `root`.
void write_runs_manifest(const std::filesystem::path& experiment_dir,
                         const std::vector<RunRecord>& records,
                         const std::filesystem::path& root);
std::vector<RunRecord> read_runs_manifest(
    const std::filesystem::path& experiment_dir,
    const std::filesystem::path& root);

}  // namespace trajbench
