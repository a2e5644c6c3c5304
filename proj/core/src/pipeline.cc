#include "trajbench/pipeline.h"

#include <fmt/format.h>

#include "trajbench/dataset.h"
#include "trajbench/fs_util.h"
#include "trajbench/svg.h"

namespace trajbench {

namespace fs = std::filesystem;

namespace {

std::size_t count_frames(const RunRecord& run, const fs::path& root,
                         const std::string& experiment) {
  const fs::path sampled =
      run_output_dir(root, experiment, run.method, run.dataset, run.sequence) /
      (run.exp_id + "_rgb.csv");
  const fs::path full = SequenceLayout{root / run.dataset / run.sequence}.rgb_csv();
  for (const auto& p : {sampled, full}) {
    if (fs::exists(p)) {
      try {
        return load_rgb_csv(p).size();
      } catch (const Error&) {
        return 0;
      }
    }
  }
  return 0;
}

}  // namespace

std::vector<RunAteRecord> evaluate_runs(const std::vector<RunRecord>& runs,
                                        const fs::path& root,
                                        const std::string& experiment,
                                        const AteOptions& options) {
  std::vector<RunAteRecord> out;
  std::map<fs::path, std::optional<Trajectory>> gt_cache;
  for (const auto& run : runs) {
    RunAteRecord rec;
    rec.experiment = experiment;
    rec.method = run.method;
    rec.dataset = run.dataset;
    rec.sequence = run.sequence;
    rec.run_index = run.run_index;
    rec.status = run.status;
    rec.num_total = count_frames(run, root, experiment);

    const fs::path gt_path =
        SequenceLayout{root / run.dataset / run.sequence}.groundtruth_csv();
    auto [it, fresh] = gt_cache.try_emplace(gt_path);
    if (fresh && fs::exists(gt_path)) {
      try {
        it->second = load_trajectory(gt_path.string());
      } catch (const Error&) {
      }
    }
    if (it->second) rec.num_gt = it->second->size();

    if (run.ok()) {
      std::optional<Trajectory> est;
      try {
        est = load_trajectory(run.trajectory_path.string());
        rec.num_estimated = est->size();
      } catch (const Error&) {
        rec.status = eval_status::kInvalidTrajectory;
      }
      if (est && !it->second) {
        rec.status = eval_status::kMissingGroundTruth;
      } else if (est) {
        try {
          const AteResult ate =
              compute_ate(*est, *it->second, options, rec.num_total);
          rec.rmse = ate.rmse();
          rec.num_pairs = ate.num_pairs;
        } catch (const EvaluationError& e) {
          rec.status = e.kind() == EvaluationErrorKind::kInsufficientCorrespondences
                           ? eval_status::kNoOverlap
                           : eval_status::kAlignmentFailed;
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunAteRecord> evaluate_experiment(const fs::path& root,
                                              const std::string& experiment,
                                              const AteOptions& options) {
  const fs::path dir = experiment_dir(root, experiment);
  const auto runs = read_runs_manifest(dir, root);
  auto records = evaluate_runs(runs, root, experiment, options);
  csv::write_table((dir / "ate_summary.csv").string(),
                   ate_summary_table(records));
  write_report(records, dir, experiment);
  return records;
}

namespace {

// Sequences whose pooled median is zero cannot be normalized; they are left
// off the radar instead of failing the whole report.
RadarValues radar_where_defined(const std::vector<RunAteRecord>& records) {
  RadarValues out;
  for (const auto& s : sequences_of(records)) {
    std::vector<RunAteRecord> subset;
    for (const auto& r : records) {
      if (r.sequence == s && r.succeeded()) subset.push_back(r);
    }
    if (subset.empty()) continue;
    try {
      RadarValues v = radar_normalize(subset);
      out.median_normalized.merge(v.median_normalized);
      out.per_run.merge(v.per_run);
      out.denominators.merge(v.denominators);
    } catch (const ReportingError& e) {
      if (e.kind() != ReportingErrorKind::kZeroDenominator) throw;
    }
  }
  return out;
}

}  // namespace

void write_report(const std::vector<RunAteRecord>& records,
                  const fs::path& out_dir, const std::string& title) {
  ensure_writable_directory(out_dir);
  const auto thresholds = log_thresholds();
  const RadarValues radar = radar_where_defined(records);
  csv::write_table((out_dir / "boxplot.csv").string(), boxplot_table(records));
  csv::write_table((out_dir / "cumulative.csv").string(),
                   cumulative_table(records, thresholds));
  csv::write_table((out_dir / "radar.csv").string(), radar_table(radar));
  csv::write_table((out_dir / "frame_coverage.csv").string(),
                   frame_coverage_csv(frame_coverage_table(records)));

  if (std::none_of(records.begin(), records.end(),
                   [](const auto& r) { return r.succeeded(); })) {
    throw ReportingError(ReportingErrorKind::kEmptySeries,
                         fmt::format("no successful runs to plot in {}",
                                     out_dir.string()));
  }
  PlotStyle style;
  style.title = title + ": ATE per sequence";
  write_file_atomic(out_dir / (title + "_boxplot.svg"),
                    render_boxplot_svg(boxplot_series(records), style));
  style.title = title + ": cumulative ATE";
  write_file_atomic(out_dir / (title + "_cumulative.svg"),
                    render_cumulative_svg(cumulative_series(records, thresholds),
                                          style));
  style.title = title + ": normalized median ATE";
  std::vector<std::string> sequences;
  for (const auto& s : sequences_of(records)) {
    if (radar.denominators.count(s)) sequences.push_back(s);
  }
  if (sequences.empty()) return;  // every sequence had zero error
  write_file_atomic(out_dir / (title + "_radar.svg"),
                    render_radar_svg(radar, methods_of(records), sequences,
                                     style));
}

fs::path report_dir(const fs::path& root, const std::string& name) {
  return root / "REPORTS" / name;
}

std::vector<RunAteRecord> build_report(const fs::path& root,
                                       const std::vector<std::string>& experiments,
                                       const std::string& name) {
  if (experiments.empty()) {
    throw ReportingError(ReportingErrorKind::kEmptyInput,
                         "report needs at least one experiment");
  }
  std::vector<RunAteRecord> all;
  for (const auto& exp : experiments) {
    const fs::path p = experiment_dir(root, exp) / "ate_summary.csv";
    if (!fs::exists(p)) {
      throw ReportingError(
          ReportingErrorKind::kEmptyInput,
          fmt::format("experiment '{}' has not been evaluated ({} missing)",
                      exp, p.string()));
    }
    auto recs = parse_ate_summary(csv::read_table(p.string()));
    all.insert(all.end(), recs.begin(), recs.end());
  }
  const fs::path dir = report_dir(root, name);
  ensure_writable_directory(dir);
  csv::write_table((dir / "ate_summary.csv").string(), ate_summary_table(all));
  write_report(all, dir, name);
  return all;
}

}  // namespace trajbench
