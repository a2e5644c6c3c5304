#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trajbench/error.h"

namespace trajbench {

enum class ExperimentErrorKind {
  kMissingField,
  kUnknownField,
  kBadType,
  kDuplicateSequence,
  kUnknownDataset,
  kDuplicateExpId,
  kMalformedRow,
  kUnknownMethod,
  kExpIdOverflow,
  kInvalidValue,
};

using ExperimentError =
    KindedError<ExperimentErrorKind, ErrorCategory::kConfiguration>;

// Insertion-ordered name -> scalar map. Values keep their textual form.
class ParameterMap {
 public:
  using Entry = std::pair<std::string, std::string>;

  ParameterMap() = default;
  ParameterMap(std::initializer_list<Entry> entries);

  // Replaces an existing value in place, otherwise appends.
  void set(const std::string& name, std::string value);
  const std::string* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  // Throws ExperimentError(kInvalidValue) when present but not numeric.
  std::optional<double> get_double(std::string_view name) const;
  std::optional<long long> get_int(std::string_view name) const;

  // `overrides` wins on shared names; its new names are appended.
  ParameterMap merged(const ParameterMap& overrides) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool operator==(const ParameterMap&) const = default;

 private:
  std::vector<Entry> entries_;
};

struct ExperimentConfig {
  std::string name;
  std::string config_path;  // sequence-set file, as written
  std::size_t num_runs = 1;
  ParameterMap parameters;
  std::optional<std::string> ablation_path;
  std::string method;
  // Directory of the file the config came from; relative paths are tried
  // against it before the working directory.
  std::filesystem::path source_dir;
};

// One config per top-level key. A document whose top level holds the
// fields directly (Config, NumRuns, ...) yields one config named
// `default_name`.
std::vector<ExperimentConfig> parse_experiment_config(
    std::string_view text, const std::string& default_name = "experiment");
std::vector<ExperimentConfig> load_experiment_config(
    const std::filesystem::path& path);

// Resolves a path from a config: absolute, else below source_dir if it
// exists there, else relative to the working directory.
std::filesystem::path resolve_config_path(const std::filesystem::path& source_dir,
                                          const std::string& path);

// dataset -> sequences, both in document order.
struct SequenceSet {
  std::vector<std::pair<std::string, std::vector<std::string>>> datasets;

  std::size_t num_sequences() const;
  bool empty() const { return datasets.empty(); }
};

SequenceSet parse_sequence_set(std::string_view text);
SequenceSet load_sequence_set(const std::filesystem::path& path);

// Ablation overrides keyed by exp_id. Header must start with "exp_id";
// comma- or whitespace-separated. Empty comma fields leave the base value.
struct AblationTable {
  std::vector<std::string> columns;  // without exp_id
  std::map<std::size_t, ParameterMap> rows;
};

AblationTable parse_ablation(std::string_view text);
AblationTable load_ablation(const std::filesystem::path& path);

// Effective parameters for every ablation row.
std::map<std::size_t, ParameterMap> expand_ablation(
    const ParameterMap& base, const AblationTable& ablation);
std::map<std::size_t, ParameterMap> expand_ablation(const ParameterMap& base,
                                                    std::string_view csv_text);

// Base parameters unless an ablation row matches run_index.
ParameterMap parameters_for_run(const ParameterMap& base,
                                const AblationTable* ablation,
                                std::size_t run_index);

// "00041"; throws kExpIdOverflow for index >= 100000.
std::string format_exp_id(std::size_t index);
std::size_t parse_exp_id(std::string_view text);

struct MethodSpec {
  std::string name;
  std::filesystem::path folder;       // working directory; empty = inherit
  std::vector<std::string> command;   // argv prefix before the run flags
  ParameterMap default_parameters;
  std::optional<std::filesystem::path> settings_template;
};

class MethodRegistry {
 public:
  // Replaces any method with the same name.
  void add(MethodSpec method);
  const MethodSpec& get(const std::string& name) const;  // kUnknownMethod
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<MethodSpec> methods_;
};

// mock, mock_precise, mock_noisy: all run `<self_exe> mock-method`.
MethodRegistry builtin_methods(const std::filesystem::path& self_exe);

// YAML map name -> {command, folder, parameters, settings_template}.
// `command` is a string (split on whitespace) or a list.
void load_methods_yaml(MethodRegistry& registry,
                       const std::filesystem::path& path);

// Flat "key: value" document. Template lines whose key is a parameter get
// the parameter value; other lines pass through; parameters missing from
// the template are appended in order.
std::string render_settings(std::string_view template_text,
                            const ParameterMap& parameters);
// Parses the flat format back. '#' comments and blank lines are skipped.
ParameterMap parse_settings(std::string_view text);

// Key the runner appends to every settings file with the per-run seed.
inline constexpr const char* kHarnessSeedKey = "harness_seed";

// Frame-selection parameter names.
inline constexpr const char* kParamMaxRgb = "max_rgb";
inline constexpr const char* kParamFps = "fps";
inline constexpr const char* kParamSegmentStart = "segment_start";
inline constexpr const char* kParamSegmentEnd = "segment_end";

}  // namespace trajbench
