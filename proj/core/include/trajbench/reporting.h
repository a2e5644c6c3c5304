#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "trajbench/csv.h"
#include "trajbench/error.h"

namespace trajbench {

enum class ReportingErrorKind { kEmptyInput, kZeroDenominator, kEmptySeries, kMalformed };

using ReportingError =
    KindedError<ReportingErrorKind, ErrorCategory::kEvaluation>;

// One evaluated (or failed) run. Failed runs carry no rmse.
struct RunAteRecord {
  std::string experiment;
  std::string method;
  std::string dataset;
  std::string sequence;
  std::size_t run_index = 0;
  std::string status = "ok";  // "ok" or a failure reason
  std::optional<double> rmse;
  std::size_t num_pairs = 0;
  std::size_t num_estimated = 0;
  std::size_t num_gt = 0;
  std::size_t num_total = 0;

  bool succeeded() const { return status == "ok" && rmse.has_value(); }
  bool operator==(const RunAteRecord&) const = default;
};

struct BoxplotStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  std::size_t n = 0;
};

// Linear-interpolation quantile at rank p * (n - 1) of sorted values.
double quantile_linear(std::span<const double> sorted, double p);

// Quartiles by quantile_linear; whiskers at the most extreme data inside
// [q1 - 1.5 IQR, q3 + 1.5 IQR]. Throws kEmptyInput for no values.
BoxplotStats boxplot_stats(std::span<const double> values);

// out[k] = #{v <= thresholds[k]}.
std::vector<std::size_t> cumulative_curve(std::span<const double> values,
                                          std::span<const double> thresholds);

// n log-spaced values from lo to hi inclusive (default 256 from 1 mm to 10 m).
std::vector<double> log_thresholds(double lo = 1e-3, double hi = 10.0,
                                   std::size_t n = 256);

using MethodSequence = std::pair<std::string, std::string>;

struct RadarValues {
  // (method, sequence) -> median(method rmse) / median(pooled rmse)
  std::map<MethodSequence, double> median_normalized;
  // Per run: (method, sequence, run_index) -> rmse / median(pooled rmse)
  std::map<std::tuple<std::string, std::string, std::size_t>, double> per_run;
  std::map<std::string, double> denominators;  // sequence -> pooled median
};

// Failed runs are ignored. Throws kZeroDenominator when a sequence's pooled
// median is below 1e-15.
RadarValues radar_normalize(std::span<const RunAteRecord> records);

struct FrameCoverageRow {
  std::string method;
  std::string sequence;
  std::size_t run = 0;
  std::string status;
  std::size_t num_estimated = 0;
  std::size_t num_pairs = 0;
  std::size_t num_total = 0;
};

std::vector<FrameCoverageRow> frame_coverage_table(
    std::span<const RunAteRecord> records);

// ate_summary.csv
inline constexpr const char* kAteSummaryHeader =
    "experiment,method,dataset,sequence,run,status,ate_rmse_m,num_pairs,"
    "num_estimated,num_gt,num_total";
csv::Table ate_summary_table(std::span<const RunAteRecord> records);
std::vector<RunAteRecord> parse_ate_summary(const csv::Table& table);

// boxplot.csv: one row per (method, sequence) including failure counts.
csv::Table boxplot_table(std::span<const RunAteRecord> records);
// cumulative.csv: per method pooled over sequences ("*") and per sequence.
csv::Table cumulative_table(std::span<const RunAteRecord> records,
                            std::span<const double> thresholds);
// radar.csv: kind=median rows per (method, sequence), kind=run per run.
csv::Table radar_table(const RadarValues& values);
csv::Table frame_coverage_csv(std::span<const FrameCoverageRow> rows);

// Distinct names in first-seen order.
std::vector<std::string> methods_of(std::span<const RunAteRecord> records);
std::vector<std::string> sequences_of(std::span<const RunAteRecord> records);

}  // namespace trajbench
