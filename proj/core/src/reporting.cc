#include "trajbench/reporting.h"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace trajbench {

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return quantile_linear(values, 0.5);
}

std::size_t to_size(const std::string& s, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ReportingError(ReportingErrorKind::kMalformed,
                         fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::string join_values(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += csv::format_double(values[i]);
  }
  return out;
}

}  // namespace

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw ReportingError(ReportingErrorKind::kEmptyInput, "no values");
  }
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) {
    throw ReportingError(ReportingErrorKind::kEmptyInput,
                         "boxplot of an empty list");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxplotStats s;
  s.n = sorted.size();
  s.q1 = quantile_linear(sorted, 0.25);
  s.median = quantile_linear(sorted, 0.5);
  s.q3 = quantile_linear(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  bool have_low = false;
  for (const double v : sorted) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
      continue;
    }
    if (!have_low) {
      s.whisker_low = std::min(v, s.q1);
      have_low = true;
    }
    s.whisker_high = std::max(v, s.q3);
  }
  return s;
}

std::vector<std::size_t> cumulative_curve(std::span<const double> values,
                                          std::span<const double> thresholds) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> out;
  out.reserve(thresholds.size());
  for (const double t : thresholds) {
    out.push_back(static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()));
  }
  return out;
}

std::vector<double> log_thresholds(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e = a + (b - a) * static_cast<double>(k) /
                             static_cast<double>(n - 1);
    out.push_back(std::pow(10.0, e));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

RadarValues radar_normalize(std::span<const RunAteRecord> records) {
  std::map<std::string, std::vector<double>> pooled;
  std::map<MethodSequence, std::vector<double>> per_method;
  for (const auto& r : records) {
    if (!r.succeeded()) continue;
    pooled[r.sequence].push_back(*r.rmse);
    per_method[{r.method, r.sequence}].push_back(*r.rmse);
  }
  RadarValues out;
  for (auto& [sequence, values] : pooled) {
    const double denom = median_of(values);
    if (!(denom >= 1e-15)) {
      throw ReportingError(
          ReportingErrorKind::kZeroDenominator,
          fmt::format("pooled median ATE of sequence '{}' is {}", sequence,
                      denom));
    }
    out.denominators[sequence] = denom;
  }
  for (const auto& [key, values] : per_method) {
    out.median_normalized[key] =
        median_of(values) / out.denominators.at(key.second);
  }
  for (const auto& r : records) {
    if (!r.succeeded()) continue;
    out.per_run[{r.method, r.sequence, r.run_index}] =
        *r.rmse / out.denominators.at(r.sequence);
  }
  return out;
}

std::vector<FrameCoverageRow> frame_coverage_table(
    std::span<const RunAteRecord> records) {
  std::vector<FrameCoverageRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({r.method, r.sequence, r.run_index, r.status,
                    r.num_estimated, r.num_pairs, r.num_total});
  }
  return rows;
}

csv::Table ate_summary_table(std::span<const RunAteRecord> records) {
  csv::Table t;
  t.header = csv::split(kAteSummaryHeader);
  for (const auto& r : records) {
    t.rows.push_back({r.experiment, r.method, r.dataset, r.sequence,
                      std::to_string(r.run_index), r.status,
                      r.rmse ? csv::format_double(*r.rmse) : std::string(),
                      std::to_string(r.num_pairs),
                      std::to_string(r.num_estimated), std::to_string(r.num_gt),
                      std::to_string(r.num_total)});
  }
  return t;
}

std::vector<RunAteRecord> parse_ate_summary(const csv::Table& table) {
  if (table.header != csv::split(kAteSummaryHeader)) {
    throw ReportingError(ReportingErrorKind::kMalformed,
                         "ate_summary.csv has an unexpected header");
  }
  std::vector<RunAteRecord> out;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ReportingError(ReportingErrorKind::kMalformed,
                           "ate_summary.csv row has the wrong field count");
    }
    RunAteRecord r;
    r.experiment = row[0];
    r.method = row[1];
    r.dataset = row[2];
    r.sequence = row[3];
    r.run_index = to_size(row[4], "run");
    r.status = row[5];
    if (!row[6].empty()) {
      double v = 0.0;
      const auto [ptr, ec] =
          std::from_chars(row[6].data(), row[6].data() + row[6].size(), v);
      if (ec != std::errc() || ptr != row[6].data() + row[6].size()) {
        throw ReportingError(ReportingErrorKind::kMalformed,
                             fmt::format("bad ate_rmse_m '{}'", row[6]));
      }
      r.rmse = v;
    }
    r.num_pairs = to_size(row[7], "num_pairs");
    r.num_estimated = to_size(row[8], "num_estimated");
    r.num_gt = to_size(row[9], "num_gt");
    r.num_total = to_size(row[10], "num_total");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> methods_of(std::span<const RunAteRecord> records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.method) == out.end()) {
      out.push_back(r.method);
    }
  }
  return out;
}

std::vector<std::string> sequences_of(std::span<const RunAteRecord> records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.sequence) == out.end()) {
      out.push_back(r.sequence);
    }
  }
  return out;
}

csv::Table boxplot_table(std::span<const RunAteRecord> records) {
  csv::Table t;
  t.header = {"method",       "sequence",     "n",        "num_failed",
              "failure_rate", "median",       "q1",       "q3",
              "whisker_low",  "whisker_high", "outliers"};
  for (const auto& method : methods_of(records)) {
    for (const auto& sequence : sequences_of(records)) {
      std::vector<double> values;
      std::size_t failed = 0, total = 0;
      for (const auto& r : records) {
        if (r.method != method || r.sequence != sequence) continue;
        ++total;
        if (r.succeeded()) {
          values.push_back(*r.rmse);
        } else {
          ++failed;
        }
      }
      if (total == 0) continue;
      const std::string rate = csv::format_double(
          static_cast<double>(failed) / static_cast<double>(total));
      if (values.empty()) {
        t.rows.push_back({method, sequence, "0", std::to_string(failed), rate,
                          "", "", "", "", "", ""});
        continue;
      }
      const BoxplotStats s = boxplot_stats(values);
      t.rows.push_back({method, sequence, std::to_string(s.n),
                        std::to_string(failed), rate,
                        csv::format_double(s.median), csv::format_double(s.q1),
                        csv::format_double(s.q3),
                        csv::format_double(s.whisker_low),
                        csv::format_double(s.whisker_high),
                        join_values(s.outliers)});
    }
  }
  return t;
}

csv::Table cumulative_table(std::span<const RunAteRecord> records,
                            std::span<const double> thresholds) {
  csv::Table t;
  t.header = {"method", "sequence", "threshold_m", "num_runs"};
  auto emit = [&](const std::string& method, const std::string& label,
                  const std::vector<double>& values) {
    const auto counts = cumulative_curve(values, thresholds);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      t.rows.push_back({method, label, csv::format_double(thresholds[k]),
                        std::to_string(counts[k])});
    }
  };
  const auto sequences = sequences_of(records);
  for (const auto& method : methods_of(records)) {
    std::vector<double> all;
    for (const auto& r : records) {
      if (r.method == method && r.succeeded()) all.push_back(*r.rmse);
    }
    emit(method, "*", all);
    for (const auto& sequence : sequences) {
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.method == method && r.sequence == sequence && r.succeeded()) {
          values.push_back(*r.rmse);
        }
      }
      emit(method, sequence, values);
    }
  }
  return t;
}

csv::Table radar_table(const RadarValues& values) {
  csv::Table t;
  t.header = {"kind", "method", "sequence", "run", "normalized_ate",
              "sequence_median_m"};
  for (const auto& [key, v] : values.median_normalized) {
    t.rows.push_back({"median", key.first, key.second, "",
                      csv::format_double(v),
                      csv::format_double(values.denominators.at(key.second))});
  }
  for (const auto& [key, v] : values.per_run) {
    const auto& [method, sequence, run] = key;
    t.rows.push_back({"run", method, sequence, std::to_string(run),
                      csv::format_double(v),
                      csv::format_double(values.denominators.at(sequence))});
  }
  return t;
}

csv::Table frame_coverage_csv(std::span<const FrameCoverageRow> rows) {
  csv::Table t;
  t.header = {"method",        "sequence",  "run",      "status",
              "num_estimated", "num_pairs", "num_total"};
  for (const auto& r : rows) {
    t.rows.push_back({r.method, r.sequence, std::to_string(r.run), r.status,
                      std::to_string(r.num_estimated),
                      std::to_string(r.num_pairs), std::to_string(r.num_total)});
  }
  return t;
}

}  // namespace trajbench
