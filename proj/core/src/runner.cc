#include "trajbench/runner.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "trajbench/adapter.h"
#include "trajbench/csv.h"
#include "trajbench/fs_util.h"
#include "trajbench/process.h"

namespace trajbench {

namespace fs = std::filesystem;

namespace {

// Unbounded MPSC queue: workers post completions, the coordinator drains.
template <typename T>
class Channel {
 public:
  void send(T value) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(value));
    }
    cv_.notify_one();
  }

  T receive() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    T v = std::move(queue_.front());
    queue_.pop_front();
    return v;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> queue_;
};

FrameSelection selection_from(const ParameterMap& params) {
  FrameSelection sel;
  if (auto v = params.get_int(kParamMaxRgb)) {
    if (*v < 0) {
      throw ExperimentError(ExperimentErrorKind::kInvalidValue,
                            "max_rgb must be non-negative");
    }
    sel.max_rgb = static_cast<std::size_t>(*v);
  }
  sel.target_fps = params.get_double(kParamFps);
  sel.segment_start = params.get_double(kParamSegmentStart);
  sel.segment_end = params.get_double(kParamSegmentEnd);
  return sel;
}

std::string relative_to(const fs::path& p, const fs::path& root) {
  if (p.empty()) return {};
  const fs::path rel = p.lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

fs::path from_manifest(const std::string& s, const fs::path& root) {
  if (s.empty()) return {};
  const fs::path p(s);
  return p.is_absolute() ? p : root / p;
}

struct Job {
  std::size_t index = 0;
  std::string dataset;
  std::string sequence;
  std::size_t run_index = 0;
  std::string exp_id;
  ParameterMap parameters;
  SequenceLayout layout;
  fs::path output_dir;
};

RunRecord run_job(const Job& job, const MethodSpec& method,
                  const ExperimentConfig& exp, const RunnerOptions& opts) {
  ExecuteOptions eo;
  eo.timeout = opts.timeout;
  eo.harness_seed =
      harness_seed(opts.seed, method.name, job.dataset, job.sequence,
                   job.run_index);
  RunRecord rec;
  try {
    fs::create_directories(job.output_dir);
    const auto rows = sample_frames(load_rgb_csv(job.layout.rgb_csv()),
                                    selection_from(job.parameters));
    const fs::path rgb = job.output_dir / (job.exp_id + "_rgb.csv");
    save_rgb_csv(rgb, rows);
    eo.rgb_csv = rgb;
    rec = execute_run(method, job.layout, job.exp_id, job.parameters,
                      job.output_dir, eo);
  } catch (const std::exception& e) {
    rec.exp_id = job.exp_id;
    rec.parameters = job.parameters;
    rec.log_path = job.output_dir / (job.exp_id + ".log");
    rec.exit_code = -1;
    rec.status = run_status::kFailed;
    std::ofstream(rec.log_path) << "harness error: " << e.what() << '\n';
  }
  rec.method = exp.method;
  rec.dataset = job.dataset;
  rec.sequence = job.sequence;
  rec.run_index = job.run_index;
  return rec;
}

}  // namespace

std::vector<std::string> method_argv(const MethodSpec& method,
                                     const SequenceLayout& layout,
                                     const fs::path& rgb_csv,
                                     const std::string& exp_id,
                                     const fs::path& settings_yaml,
                                     const fs::path& output_dir) {
  std::vector<std::string> argv = method.command;
  const auto abs = [](const fs::path& p) { return fs::absolute(p).string(); };
  argv.insert(argv.end(),
              {"--sequence_path", abs(layout.root), "--calib_yaml",
               abs(layout.calibration_yaml()), "--rgb_csv", abs(rgb_csv),
               "--exp_id", exp_id, "--settings_yaml", abs(settings_yaml),
               "--visualization", "0", "--exp_folder", abs(output_dir)});
  return argv;
}

RunRecord execute_run(const MethodSpec& method, const SequenceLayout& layout,
                      const std::string& exp_id, const ParameterMap& parameters,
                      const fs::path& output_dir, const ExecuteOptions& options) {
  RunRecord rec;
  rec.exp_id = exp_id;
  rec.method = method.name;
  rec.parameters = parameters;
  rec.log_path = output_dir / (exp_id + ".log");

  ensure_writable_directory(output_dir);
  const fs::path settings = output_dir / (exp_id + "_settings.yaml");
  const fs::path trajectory = output_dir / (exp_id + ".txt");
  std::string tmpl;
  if (method.settings_template) tmpl = read_file(*method.settings_template);
  std::string rendered = render_settings(tmpl, parameters);
  if (options.harness_seed) {
    rendered += fmt::format("{}: {}\n", kHarnessSeedKey, *options.harness_seed);
  }
  write_file_atomic(settings, rendered);
  // A stale trajectory from an earlier attempt must not count as output.
  std::error_code ec;
  fs::remove(trajectory, ec);

  ProcessOptions po;
  po.log_path = rec.log_path;
  if (!method.folder.empty()) po.working_directory = method.folder;
  po.timeout = options.timeout;
  const auto argv =
      method_argv(method, layout, options.rgb_csv.value_or(layout.rgb_csv()),
                  exp_id, settings, output_dir);
  const ProcessResult res = run_process(argv, po);
  rec.wall_time_s = res.wall_time_s;

  switch (res.status) {
    case ProcessResult::Status::kNotFound:
      rec.exit_code = -1;
      rec.status = run_status::kNotFound;
      break;
    case ProcessResult::Status::kTimedOut:
      rec.exit_code = -1;
      rec.status = run_status::kTimeout;
      break;
    case ProcessResult::Status::kSignaled:
      rec.exit_code = -res.exit_code;
      rec.status = run_status::kFailed;
      break;
    case ProcessResult::Status::kExited:
      rec.exit_code = res.exit_code;
      if (res.exit_code != 0) {
        rec.status = run_status::kFailed;
      } else if (!fs::exists(trajectory)) {
        rec.status = run_status::kMissingOutput;
      } else {
        rec.trajectory_path = trajectory;
      }
      break;
  }
  return rec;
}

fs::path experiment_dir(const fs::path& root, const std::string& experiment) {
  return root / "EXPERIMENTS" / experiment;
}

fs::path run_output_dir(const fs::path& root, const std::string& experiment,
                        const std::string& method, const std::string& dataset,
                        const std::string& sequence) {
  return experiment_dir(root, experiment) / method / dataset / sequence;
}

std::uint64_t harness_seed(std::uint64_t seed, const std::string& method,
                           const std::string& dataset,
                           const std::string& sequence, std::size_t run_index) {
  // Masked to 63 bits so it survives signed parsing.
  return stable_hash(fmt::format("{}|{}|{}|{}|{}", seed, method, dataset,
                                 sequence, run_index)) &
         0x7fffffffffffffffULL;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& exp,
                                      const SequenceSet& sequences,
                                      const fs::path& root,
                                      const RunnerOptions& opts) {
  if (!opts.registry) {
    throw ExperimentError(ExperimentErrorKind::kUnknownMethod,
                          "no method registry");
  }
  const MethodSpec& method = opts.registry->get(exp.method);
  if (method.command.empty() || !executable_exists(method.command.front())) {
    throw RunnerError(
        RunnerErrorKind::kExecutableNotFound,
        fmt::format("executable for method '{}' not found: '{}'", method.name,
                    method.command.empty() ? "" : method.command.front()));
  }
  std::optional<AblationTable> ablation;
  if (exp.ablation_path) {
    ablation = load_ablation(resolve_config_path(exp.source_dir, *exp.ablation_path));
  }
  const ParameterMap base = method.default_parameters.merged(exp.parameters);

  const fs::path exp_dir = experiment_dir(root, exp.name);
  ensure_writable_directory(exp_dir);

  std::vector<Job> jobs;
  for (const auto& [dataset, names] : sequences.datasets) {
    for (const auto& sequence : names) {
      const fs::path seq_root = root / dataset / sequence;
      if (!validate_sequence(seq_root).ok()) {
        if (!opts.prepare_missing) {
          throw DatasetError(
              DatasetErrorKind::kValidationFailed,
              validate_sequence(seq_root).summary());
        }
        auto adapter = make_adapter(dataset, opts.seed);
        if (!adapter) {
          throw ExperimentError(
              ExperimentErrorKind::kUnknownDataset,
              fmt::format("unknown dataset '{}' and no prepared sequence at {}",
                          dataset, seq_root.string()));
        }
        prepare_sequence(*adapter, sequence, root / dataset);
      }
      for (std::size_t r = 0; r < exp.num_runs; ++r) {
        Job job;
        job.index = jobs.size();
        job.dataset = dataset;
        job.sequence = sequence;
        job.run_index = r;
        job.exp_id = format_exp_id(job.index);
        job.parameters =
            parameters_for_run(base, ablation ? &*ablation : nullptr, r);
        selection_from(job.parameters);  // reject bad values up front
        job.layout = {seq_root};
        job.output_dir =
            run_output_dir(root, exp.name, exp.method, dataset, sequence);
        jobs.push_back(std::move(job));
      }
    }
  }

  std::vector<RunRecord> records(jobs.size());
  Channel<std::pair<std::size_t, RunRecord>> done;
  std::atomic<std::size_t> next{0};
  const std::size_t nworkers =
      std::clamp<std::size_t>(opts.workers, 1, std::max<std::size_t>(1, jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < nworkers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          done.send({i, run_job(jobs[i], method, exp, opts)});
        }
      });
    }
    for (std::size_t n = 0; n < jobs.size(); ++n) {
      auto [i, rec] = done.receive();
      if (opts.on_complete) opts.on_complete(rec);
      records[i] = std::move(rec);
    }
  }
  write_runs_manifest(exp_dir, records, root);
  return records;
}

void write_runs_manifest(const fs::path& exp_dir,
                         const std::vector<RunRecord>& records,
                         const fs::path& root) {
  csv::Table runs;
  runs.header = csv::split(kRunsCsvHeader);
  csv::Table params;
  params.header = {"exp_id", "name", "value"};
  for (const auto& r : records) {
    runs.rows.push_back({r.exp_id, r.method, r.dataset, r.sequence,
                         std::to_string(r.run_index), std::to_string(r.exit_code),
                         fmt::format("{:.3f}", r.wall_time_s),
                         relative_to(r.trajectory_path, root), r.status});
    for (const auto& [k, v] : r.parameters.entries()) {
      params.rows.push_back({r.exp_id, k, v});
    }
  }
  csv::write_table((exp_dir / "runs.csv").string(), runs);
  csv::write_table((exp_dir / "run_parameters.csv").string(), params);
}

std::vector<RunRecord> read_runs_manifest(const fs::path& exp_dir,
                                          const fs::path& root) {
  const fs::path path = exp_dir / "runs.csv";
  if (!fs::exists(path)) {
    throw RunnerError(RunnerErrorKind::kManifest,
                      fmt::format("no run manifest at {}", path.string()));
  }
  const csv::Table runs = csv::read_table(path.string());
  if (runs.header != csv::split(kRunsCsvHeader)) {
    throw RunnerError(RunnerErrorKind::kManifest,
                      fmt::format("{} has an unexpected header", path.string()));
  }
  std::vector<RunRecord> out;
  std::map<std::string, std::size_t> by_id;
  for (const auto& row : runs.rows) {
    if (row.size() != runs.header.size()) {
      throw RunnerError(RunnerErrorKind::kManifest,
                        fmt::format("{}: row with {} fields", path.string(),
                                    row.size()));
    }
    RunRecord r;
    r.exp_id = row[0];
    r.method = row[1];
    r.dataset = row[2];
    r.sequence = row[3];
    try {
      r.run_index = std::stoul(row[4]);
      r.exit_code = std::stoi(row[5]);
      r.wall_time_s = std::stod(row[6]);
    } catch (const std::exception&) {
      throw RunnerError(RunnerErrorKind::kManifest,
                        fmt::format("{}: bad numeric field in run {}",
                                    path.string(), r.exp_id));
    }
    r.trajectory_path = from_manifest(row[7], root);
    r.status = row[8];
    r.log_path = run_output_dir(root, exp_dir.filename().string(), r.method,
                                r.dataset, r.sequence) /
                 (r.exp_id + ".log");
    by_id[r.exp_id] = out.size();
    out.push_back(std::move(r));
  }
  const fs::path ppath = exp_dir / "run_parameters.csv";
  if (fs::exists(ppath)) {
    for (const auto& row : csv::read_table(ppath.string()).rows) {
      if (row.size() != 3) continue;
      if (auto it = by_id.find(row[0]); it != by_id.end()) {
        out[it->second].parameters.set(row[1], row[2]);
      }
    }
  }
  return out;
}

}  // namespace trajbench
