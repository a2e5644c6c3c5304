#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trajbench/evaluation.h"
#include "trajbench/reporting.h"
#include "trajbench/runner.h"

namespace trajbench {

// Evaluation statuses beyond the run statuses.
namespace eval_status {
inline constexpr const char* kInvalidTrajectory = "invalid_trajectory";
inline constexpr const char* kNoOverlap = "no_overlap";
inline constexpr const char* kAlignmentFailed = "alignment_failed";
inline constexpr const char* kMissingGroundTruth = "missing_groundtruth";
}  // namespace eval_status

// Scores every run against <root>/<dataset>/<sequence>/groundtruth.csv.
// Never throws for per-run problems; they become statuses.
std::vector<RunAteRecord> evaluate_runs(const std::vector<RunRecord>& runs,
                                        const std::filesystem::path& root,
                                        const std::string& experiment,
                                        const AteOptions& options);

// Reads runs.csv, writes ate_summary.csv plus the report artifacts into
// the experiment directory. Run directories are only read.
std::vector<RunAteRecord> evaluate_experiment(const std::filesystem::path& root,
                                              const std::string& experiment,
                                              const AteOptions& options);

// boxplot/cumulative/radar/frame_coverage CSVs and <title>_<plot>.svg for
// boxplot, cumulative and radar. Sequences with zero pooled error are left
// off the radar (no radar SVG if none remain). Throws
// ReportingError(kEmptySeries) after writing the CSVs if no run succeeded.
void write_report(const std::vector<RunAteRecord>& records,
                  const std::filesystem::path& out_dir,
                  const std::string& title);

// Merges EXPERIMENTS/<exp>/ate_summary.csv of each experiment into
// REPORTS/<name>/ (ate_summary.csv plus write_report output).
std::vector<RunAteRecord> build_report(
    const std::filesystem::path& root,
    const std::vector<std::string>& experiments, const std::string& name);

std::filesystem::path report_dir(const std::filesystem::path& root,
                                 const std::string& name);

}  // namespace trajbench
