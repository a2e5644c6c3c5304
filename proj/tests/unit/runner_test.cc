#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "testing/temp_dir.h"
#include "trajbench/adapter.h"
#include "trajbench/csv.h"
#include "trajbench/pipeline.h"
#include "trajbench/runner.h"

namespace trajbench {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Benchmark root with two small synthetic sequences.
struct Bench {
  testing::TempDir dir;
  fs::path root = dir.path();
  SequenceSet seqs;

  Bench() {
    SyntheticAdapter a{SyntheticOptions{.seed = 0, .num_frames = 40}};
    for (const char* s : {"sequence_00", "sequence_01"}) {
      prepare_sequence(a, s, root / "synthetic");
    }
    seqs.datasets = {{"synthetic", {"sequence_00", "sequence_01"}}};
  }

  MethodSpec script(const std::string& name, const std::string& body) const {
    const fs::path p = root / (name + ".sh");
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    MethodSpec m;
    m.name = name;
    m.command = {"/bin/sh", p.string()};
    return m;
  }
};

// `sh` prelude that pulls --exp_id and --exp_folder out of "$@".
constexpr const char* kArgs =
    "while [ $# -gt 0 ]; do case \"$1\" in --exp_id) id=$2;; --exp_folder) out=$2;; esac; "
    "shift 2; done";

ExperimentConfig config(const std::string& name, const std::string& method, std::size_t runs) {
  ExperimentConfig e;
  e.name = name;
  e.method = method;
  e.num_runs = runs;
  e.config_path = "unused.yaml";
  return e;
}

TEST(ExecuteRun, ArgvFollowsFlagContract) {
  MethodSpec m;
  m.command = {"/opt/m", "--mono"};
  const auto argv = method_argv(m, {"/data/seq"}, "/data/seq/rgb.csv", "00004",
                                "/exp/00004_settings.yaml", "/exp");
  const std::vector<std::string> expect = {
      "/opt/m",        "--mono",         "--sequence_path", "/data/seq",
      "--calib_yaml",  "/data/seq/calibration.yaml",        "--rgb_csv",
      "/data/seq/rgb.csv", "--exp_id",   "00004",           "--settings_yaml",
      "/exp/00004_settings.yaml",        "--visualization", "0",
      "--exp_folder",  "/exp"};
  EXPECT_EQ(argv, expect);
}

TEST(ExecuteRun, StatusMapping) {
  Bench b;
  const SequenceLayout layout{b.root / "synthetic" / "sequence_00"};
  const fs::path out = b.root / "out";
  ExecuteOptions eo;
  eo.timeout = std::chrono::seconds(1);

  RunRecord r = execute_run(b.script("fail", "echo boom >&2; exit 1"), layout, "00000", {}, out, eo);
  EXPECT_EQ(r.status, run_status::kFailed);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(slurp(r.log_path).find("boom"), std::string::npos);

  r = execute_run(b.script("quiet", "exit 0"), layout, "00001", {}, out, eo);
  EXPECT_EQ(r.status, run_status::kMissingOutput);
  EXPECT_TRUE(r.trajectory_path.empty());

  r = execute_run(b.script("slow", "sleep 30"), layout, "00002", {}, out, eo);
  EXPECT_EQ(r.status, run_status::kTimeout);
  EXPECT_LT(r.wall_time_s, 10.0);

  MethodSpec missing;
  missing.name = "missing";
  missing.command = {"/nonexistent/method"};
  r = execute_run(missing, layout, "00003", {}, out, eo);
  EXPECT_EQ(r.status, run_status::kNotFound);

  r = execute_run(b.script("ok", std::string(kArgs) + "\necho '0 0 0 0 0 0 0 1' > \"$out/$id.txt\""),
                  layout, "00004", {{"alpha", "3"}}, out, eo);
  EXPECT_TRUE(r.ok()) << slurp(r.log_path);
  EXPECT_EQ(r.trajectory_path, out / "00004.txt");
  EXPECT_NE(slurp(out / "00004_settings.yaml").find("alpha: 3"), std::string::npos);
}

TEST(ExecuteRun, StaleTrajectoryDoesNotCount) {
  Bench b;
  const SequenceLayout layout{b.root / "synthetic" / "sequence_00"};
  const fs::path out = b.root / "out";
  fs::create_directories(out);
  std::ofstream(out / "00000.txt") << "0 0 0 0 0 0 0 1\n";
  const RunRecord r = execute_run(b.script("quiet", "exit 0"), layout, "00000", {}, out);
  EXPECT_EQ(r.status, run_status::kMissingOutput);
}

TEST(RunExperiment, FailingRunDoesNotStopBatch) {
  Bench b;
  MethodRegistry reg = builtin_methods(TRAJBENCH_EXE);
  MethodSpec flaky = b.script(
      "flaky", std::string("case \"$*\" in *'--exp_id 00002'*) exit 1;; esac\nexec ") +
                   TRAJBENCH_EXE + " mock-method \"$@\"");
  flaky.default_parameters = reg.get("mock").default_parameters;
  reg.add(flaky);
  RunnerOptions opts;
  opts.registry = &reg;
  opts.workers = 2;
  const auto recs = run_experiment(config("flaky_exp", "flaky", 3), b.seqs, b.root, opts);
  ASSERT_EQ(recs.size(), 6u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].exp_id, format_exp_id(i));
    EXPECT_EQ(recs[i].status, i == 2 ? "failed" : "ok") << i;
  }
  const auto manifest = read_runs_manifest(experiment_dir(b.root, "flaky_exp"), b.root);
  ASSERT_EQ(manifest.size(), 6u);
  EXPECT_EQ(manifest[2].status, "failed");
  EXPECT_EQ(manifest[5].trajectory_path, recs[5].trajectory_path);
  // Evaluation keeps the failed run as a status row.
  const auto ev = evaluate_experiment(b.root, "flaky_exp", {});
  ASSERT_EQ(ev.size(), 6u);
  EXPECT_EQ(ev[2].status, "failed");
  EXPECT_TRUE(ev[3].succeeded());
}

std::string masked_runs_csv(const fs::path& exp_dir) {
  csv::Table t = csv::read_table((exp_dir / "runs.csv").string());
  const int col = t.column("wall_time_s");
  for (auto& row : t.rows) row[col] = "*";
  return csv::format_table(t);
}

TEST(RunExperiment, WorkerCountDoesNotChangeResults) {
  Bench b;
  const MethodRegistry reg = builtin_methods(TRAJBENCH_EXE);
  std::string runs[2], params[2], summaries[2];
  for (int k = 0; k < 2; ++k) {
    RunnerOptions opts;
    opts.registry = &reg;
    opts.workers = k == 0 ? 1 : 4;
    opts.seed = 9;
    const std::string name = k == 0 ? "serial" : "parallel";
    ExperimentConfig e = config(name, "mock", 10);
    const auto recs = run_experiment(e, b.seqs, b.root, opts);
    ASSERT_EQ(recs.size(), 20u);
    EXPECT_EQ(recs.front().exp_id, "00000");
    EXPECT_EQ(recs.back().exp_id, "00019");
    EXPECT_EQ(recs[10].sequence, "sequence_01");
    EXPECT_EQ(recs[10].run_index, 0u);
    const fs::path dir = experiment_dir(b.root, name);
    evaluate_experiment(b.root, name, {});
    // Paths and experiment names differ by construction; compare the rest.
    runs[k] = std::regex_replace(masked_runs_csv(dir), std::regex(name), "X");
    params[k] = slurp(dir / "run_parameters.csv");
    summaries[k] = std::regex_replace(slurp(dir / "ate_summary.csv"), std::regex(name), "X");
  }
  EXPECT_EQ(runs[0], runs[1]);
  EXPECT_EQ(params[0], params[1]);
  EXPECT_EQ(summaries[0], summaries[1]);
}

TEST(RunExperiment, RecordsEffectiveParameters) {
  Bench b;
  const MethodRegistry reg = builtin_methods(TRAJBENCH_EXE);
  fs::create_directories(b.root / "configs");
  std::ofstream(b.root / "configs" / "abl.csv") << "exp_id sigma_pos max_rgb\n0 0.2 10\n";
  ExperimentConfig e = config("abl", "mock", 2);
  e.parameters = {{"max_rgb", "20"}, {"verbose", "0"}};
  e.ablation_path = "configs/abl.csv";
  e.source_dir = b.root;
  SequenceSet one;
  one.datasets = {{"synthetic", {"sequence_00"}}};
  RunnerOptions opts;
  opts.registry = &reg;
  const auto recs = run_experiment(e, one, b.root, opts);
  ASSERT_EQ(recs.size(), 2u);
  const ParameterMap defaults = reg.get("mock").default_parameters;
  EXPECT_EQ(recs[1].parameters, defaults.merged(e.parameters));
  EXPECT_EQ(recs[0].parameters,
            defaults.merged(e.parameters).merged({{"sigma_pos", "0.2"}, {"max_rgb", "10"}}));
  // Sampled frame lists follow max_rgb.
  const fs::path out = run_output_dir(b.root, "abl", "mock", "synthetic", "sequence_00");
  EXPECT_EQ(load_rgb_csv(out / "00000_rgb.csv").size(), 10u);
  EXPECT_EQ(load_rgb_csv(out / "00001_rgb.csv").size(), 20u);
  // The manifest restores the same parameters.
  const auto back = read_runs_manifest(experiment_dir(b.root, "abl"), b.root);
  EXPECT_EQ(back[0].parameters, recs[0].parameters);
  EXPECT_EQ(back[1].parameters, recs[1].parameters);
  // Settings carry the per-run seed, which is not a recorded parameter.
  EXPECT_NE(slurp(out / "00000_settings.yaml").find("harness_seed: "), std::string::npos);
  EXPECT_FALSE(recs[0].parameters.contains(kHarnessSeedKey));
}

TEST(RunExperiment, ConfigurationErrors) {
  Bench b;
  const MethodRegistry reg = builtin_methods(TRAJBENCH_EXE);
  RunnerOptions opts;
  opts.registry = &reg;
  EXPECT_THROW(run_experiment(config("e", "nope", 1), b.seqs, b.root, opts), ExperimentError);
  SequenceSet eth;
  eth.datasets = {{"eth", {"table_3"}}};
  try {
    run_experiment(config("e", "mock", 1), eth, b.root, opts);
    ADD_FAILURE();
  } catch (const ExperimentError& e) {
    EXPECT_EQ(e.kind(), ExperimentErrorKind::kUnknownDataset);
  }
  MethodRegistry broken;
  MethodSpec m;
  m.name = "gone";
  m.command = {"/nonexistent/gone"};
  broken.add(m);
  opts.registry = &broken;
  try {
    run_experiment(config("e", "gone", 1), b.seqs, b.root, opts);
    ADD_FAILURE();
  } catch (const RunnerError& e) {
    EXPECT_EQ(e.kind(), RunnerErrorKind::kExecutableNotFound);
  }
}

TEST(HarnessSeed, IndependentOfExperimentSize) {
  EXPECT_EQ(harness_seed(1, "m", "d", "s", 3), harness_seed(1, "m", "d", "s", 3));
  EXPECT_NE(harness_seed(1, "m", "d", "s", 3), harness_seed(1, "m", "d", "s", 4));
  EXPECT_NE(harness_seed(1, "m", "d", "s", 3), harness_seed(2, "m", "d", "s", 3));
  EXPECT_LT(harness_seed(1, "m", "d", "s", 3), 1ULL << 63);
}

}  // namespace
}  // namespace trajbench
