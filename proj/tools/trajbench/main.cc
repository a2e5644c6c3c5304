// trajbench: prepare datasets, run methods, evaluate ATE, build reports.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "trajbench/adapter.h"
#include "trajbench/dataset.h"
#include "trajbench/evaluation.h"
#include "trajbench/experiment.h"
#include "trajbench/fs_util.h"
#include "trajbench/mock_method.h"
#include "trajbench/pipeline.h"
#include "trajbench/reporting.h"
#include "trajbench/runner.h"

namespace fs = std::filesystem;
using namespace trajbench;

namespace {

struct Globals {
  std::string root;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  int verbosity = 0;
  std::uint64_t seed = 0;
};

Globals g;

template <typename... Args>
void info(int level, fmt::format_string<Args...> f, Args&&... args) {
  if (g.verbosity >= level) {
    fmt::print(stderr, "{}\n", fmt::format(f, std::forward<Args>(args)...));
  }
}

fs::path benchmark_root() {
  if (!g.root.empty()) return g.root;
  if (const char* env = std::getenv("TRAJBENCH_ROOT"); env && *env) return env;
  return "VSLAMLAB-BENCHMARK";
}

fs::path self_exe() {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  if (ec) {
    throw Error(ErrorCategory::kExecution, "cannot locate own executable");
  }
  return p;
}

MethodRegistry registry_with(const std::string& methods_yaml) {
  MethodRegistry reg = builtin_methods(self_exe());
  if (!methods_yaml.empty()) load_methods_yaml(reg, methods_yaml);
  return reg;
}

void print_summary(const std::vector<RunAteRecord>& records) {
  fmt::print("{:<16} {:<20} {:>6} {:>6} {:>14} {:>14}\n", "method", "sequence",
             "runs", "ok", "median_ate_m", "max_ate_m");
  for (const auto& method : methods_of(records)) {
    for (const auto& sequence : sequences_of(records)) {
      std::vector<double> v;
      std::size_t runs = 0;
      for (const auto& r : records) {
        if (r.method != method || r.sequence != sequence) continue;
        ++runs;
        if (r.succeeded()) v.push_back(*r.rmse);
      }
      if (runs == 0) continue;
      std::string med = "-", mx = "-";
      if (!v.empty()) {
        std::sort(v.begin(), v.end());
        med = fmt::format("{:.6f}", quantile_linear(v, 0.5));
        mx = fmt::format("{:.6f}", v.back());
      }
      fmt::print("{:<16} {:<20} {:>6} {:>6} {:>14} {:>14}\n", method, sequence,
                 runs, v.size(), med, mx);
    }
  }
}

RunnerOptions runner_options(const MethodRegistry& reg, double timeout_s,
                             bool prepare) {
  RunnerOptions o;
  o.registry = &reg;
  o.workers = g.workers;
  o.seed = g.seed;
  o.timeout = std::chrono::seconds(static_cast<long long>(timeout_s));
  o.prepare_missing = prepare;
  o.on_complete = [](const RunRecord& r) {
    info(1, "run {} {} {}/{} -> {} ({:.2f} s)", r.exp_id, r.method, r.dataset,
         r.sequence, r.status, r.wall_time_s);
  };
  return o;
}

// Returns the number of failed runs.
std::size_t run_config_file(const fs::path& path, const MethodRegistry& reg,
                            const std::vector<std::string>& only,
                            double timeout_s, bool prepare,
                            std::vector<std::string>* names) {
  const auto configs = load_experiment_config(path);
  if (configs.empty()) {
    throw ExperimentError(ExperimentErrorKind::kMissingField,
                          fmt::format("{} defines no experiments", path.string()));
  }
  const fs::path root = benchmark_root();
  std::size_t failed = 0;
  for (const auto& cfg : configs) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), cfg.name) == only.end()) {
      continue;
    }
    const auto seqs =
        load_sequence_set(resolve_config_path(cfg.source_dir, cfg.config_path));
    info(1, "experiment {}: {} x {} sequences x {} runs", cfg.name, cfg.method,
         seqs.num_sequences(), cfg.num_runs);
    const auto records =
        run_experiment(cfg, seqs, root, runner_options(reg, timeout_s, prepare));
    const auto bad = std::count_if(records.begin(), records.end(),
                                   [](const auto& r) { return !r.ok(); });
    failed += static_cast<std::size_t>(bad);
    fmt::print("{}: {} runs, {} failed -> {}\n", cfg.name, records.size(), bad,
               (experiment_dir(root, cfg.name) / "runs.csv").string());
    if (names) names->push_back(cfg.name);
  }
  return failed;
}

int cmd_demo(const std::string& name, std::size_t runs, std::size_t frames) {
  const fs::path root = benchmark_root();
  ensure_writable_directory(root);
  info(1, "demo root {}", fs::absolute(root).string());

  SyntheticOptions so;
  so.seed = g.seed;
  so.num_frames = frames;
  SyntheticAdapter adapter(so);
  const std::vector<std::string> sequences = {"sequence_00", "sequence_01"};
  for (const auto& s : sequences) {
    prepare_sequence(adapter, s, root / "synthetic");
  }

  const fs::path configs = root / "configs";
  ensure_writable_directory(configs);
  write_file_atomic(configs / (name + "_sequences.yaml"),
                    "synthetic:\n- sequence_00\n- sequence_01\n");
  std::string exp_yaml;
  for (const char* method : {"mock_precise", "mock_noisy"}) {
    exp_yaml += fmt::format(
        "{}_{}:\n  Config: {}_sequences.yaml\n  NumRuns: {}\n"
        "  Parameters: {{verbose: 0}}\n  Method: {}\n\n",
        name, method, name, runs, method);
  }
  const fs::path exp_path = configs / (name + "_experiments.yaml");
  write_file_atomic(exp_path, exp_yaml);

  const MethodRegistry reg = registry_with("");
  std::vector<std::string> names;
  const std::size_t failed =
      run_config_file(exp_path, reg, {}, 1800.0, false, &names);
  for (const auto& n : names) evaluate_experiment(root, n, AteOptions{});
  const auto records = build_report(root, names, name);
  print_summary(records);
  fmt::print("report: {}\n", report_dir(root, name).string());
  if (failed > 0) {
    fmt::print(stderr, "demo: {} runs failed\n", failed);
    return static_cast<int>(ErrorCategory::kExecution);
  }
  return 0;
}

int cmd_prepare(const std::string& dataset,
                const std::vector<std::string>& sequences) {
  auto adapter = make_adapter(dataset, g.seed);
  if (!adapter) {
    throw DatasetError(DatasetErrorKind::kUnknownDataset,
                       fmt::format("unknown dataset '{}'", dataset));
  }
  const fs::path root = benchmark_root() / dataset;
  ensure_writable_directory(root);
  for (const auto& s : sequences) {
    const auto layout = prepare_sequence(*adapter, s, root);
    fmt::print("prepared {}\n", layout.root.string());
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto report = validate_sequence(path);
  fmt::print("{}", report.summary());
  return report.ok() ? 0 : static_cast<int>(ErrorCategory::kData);
}

int cmd_evaluate(const std::string& exp, const std::string& align,
                 double max_diff, double offset) {
  AteOptions o;
  o.align_mode = *parse_align_mode(align);  // validated by IsMember
  o.max_difference = max_diff;
  o.time_offset = offset;
  const auto records = evaluate_experiment(benchmark_root(), exp, o);
  print_summary(records);
  return 0;
}

int cmd_report(const std::vector<std::string>& exps, const std::string& name) {
  const auto records = build_report(benchmark_root(), exps, name);
  print_summary(records);
  fmt::print("report: {}\n", report_dir(benchmark_root(), name).string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for visual SLAM trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--root", g.root,
                 "Benchmark root (default: $TRAJBENCH_ROOT or "
                 "./VSLAMLAB-BENCHMARK)");
  app.add_option("--workers", g.workers, "Concurrent method runs")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", g.verbosity, "Increase log detail (repeatable)");
  app.add_option("--seed", g.seed, "Seed for synthetic data and mock methods");

  auto* demo = app.add_subcommand("demo", "Synthetic end-to-end benchmark");
  std::string demo_name = "demo";
  std::size_t demo_runs = 5;
  std::size_t demo_frames = 300;
  demo->add_option("--name", demo_name, "Report name")->capture_default_str();
  demo->add_option("--runs", demo_runs, "Runs per method and sequence")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  demo->add_option("--frames", demo_frames, "Frames per synthetic sequence")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* prepare = app.add_subcommand("prepare", "Download and convert sequences");
  std::string prep_dataset;
  std::vector<std::string> prep_sequences;
  prepare->add_option("dataset", prep_dataset, "synthetic or tum_rgbd")
      ->required();
  prepare->add_option("sequences", prep_sequences, "Sequence names")
      ->required();

  auto* validate = app.add_subcommand("validate", "Check a sequence directory");
  std::string val_path;
  validate->add_option("path", val_path, "Sequence directory")->required();

  auto* run = app.add_subcommand("run", "Execute an experiment config");
  std::string run_config, run_methods;
  std::vector<std::string> run_only;
  double run_timeout = 1800.0;
  bool run_no_prepare = false;
  run->add_option("config", run_config, "Experiment YAML")->required();
  run->add_option("--experiment", run_only,
                  "Only run these experiments (repeatable)");
  run->add_option("--methods", run_methods, "YAML with extra method specs");
  run->add_option("--timeout", run_timeout, "Per-run timeout in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-prepare", run_no_prepare,
                "Fail instead of preparing missing sequences");

  auto* evaluate = app.add_subcommand("evaluate", "Compute ATE for an experiment");
  std::string eval_exp, eval_align = "sim3";
  double eval_max_diff = kDefaultMaxTimeDifference, eval_offset = 0.0;
  evaluate->add_option("experiment", eval_exp, "Experiment name")->required();
  evaluate->add_option("--align", eval_align, "sim3, se3 or none")
      ->capture_default_str()
      ->check(CLI::IsMember({"sim3", "se3", "none"}));
  evaluate->add_option("--max-diff", eval_max_diff,
                       "Association tolerance in seconds")
      ->capture_default_str();
  evaluate->add_option("--time-offset", eval_offset,
                       "Seconds added to estimate stamps")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "Merge evaluated experiments");
  std::vector<std::string> rep_exps;
  std::string rep_name = "report";
  report->add_option("experiments", rep_exps, "Experiment names")->required();
  report->add_option("--name", rep_name, "Report directory name")
      ->capture_default_str();

  auto* mock = app.add_subcommand("mock-method",
                                  "Built-in method: noisy ground truth");
  MockInvocation inv;
  MockOverrides ov;
  std::string sp, cy, rc, sy, ef;
  mock->add_option("--sequence_path", sp, "Sequence directory")->required();
  mock->add_option("--calib_yaml", cy, "Calibration file");
  mock->add_option("--rgb_csv", rc, "Frame list (default: sequence rgb.csv)");
  mock->add_option("--exp_id", inv.exp_id, "Run id, e.g. 00000")->required();
  mock->add_option("--settings_yaml", sy, "Settings with noise keys");
  mock->add_option("--visualization", inv.visualization, "Ignored")
      ->capture_default_str();
  mock->add_option("--exp_folder", ef, "Output directory")->required();
  mock->add_option("--sigma_pos", ov.sigma_pos, "Position noise (m)");
  mock->add_option("--sigma_rot", ov.sigma_rot, "Rotation noise (rad)");
  mock->add_option("--scale", ov.scale, "Output scale factor");
  mock->add_option("--drift_per_frame", ov.drift_per_frame,
                   "Random-walk step (m)");
  mock->add_option("--keyframe_stride", ov.keyframe_stride,
                   "Emit every k-th frame");
  mock->add_option("--fail_after_frame", ov.fail_after_frame,
                   "Stop after this many frames");
  mock->add_option("--noise_seed", ov.seed, "Noise seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands({})) {
      if (sub->parsed()) target = sub;
    }
    if (target == &app) {
      std::cout << app.help("", CLI::AppFormatMode::All);
    } else {
      std::cout << target->help();
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::kConfiguration);
  }

  try {
    if (*demo) return cmd_demo(demo_name, demo_runs, demo_frames);
    if (*prepare) return cmd_prepare(prep_dataset, prep_sequences);
    if (*validate) return cmd_validate(val_path);
    if (*run) {
      const MethodRegistry reg = registry_with(run_methods);
      const std::size_t failed = run_config_file(
          run_config, reg, run_only, run_timeout, !run_no_prepare, nullptr);
      return failed == 0 ? 0 : static_cast<int>(ErrorCategory::kExecution);
    }
    if (*evaluate) {
      return cmd_evaluate(eval_exp, eval_align, eval_max_diff, eval_offset);
    }
    if (*report) return cmd_report(rep_exps, rep_name);
    if (*mock) {
      inv.sequence_path = sp;
      inv.calib_yaml = cy;
      inv.rgb_csv = rc;
      inv.settings_yaml = sy;
      inv.exp_folder = ef;
      const auto out = run_mock_method(inv, ov);
      info(1, "wrote {}", out.string());
      return 0;
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(ErrorCategory::kExecution);
  }
  return 0;
}
