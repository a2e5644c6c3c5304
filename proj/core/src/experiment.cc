#include "trajbench/experiment.h"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <sstream>

#include "trajbench/csv.h"
#include "trajbench/fs_util.h"

namespace trajbench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

[[noreturn]] void fail(ExperimentErrorKind kind, const std::string& msg) {
  throw ExperimentError(kind, msg);
}

YAML::Node load_yaml(std::string_view text, const char* what) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("{} is not valid YAML: {}", what, e.what()));
  }
}

ParameterMap parse_parameter_node(const YAML::Node& node,
                                  const std::string& where) {
  ParameterMap out;
  if (!node || node.IsNull()) return out;
  if (!node.IsMap()) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("{}: Parameters must be a map", where));
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (key.empty()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("{}: empty parameter name", where));
    }
    if (!kv.second.IsScalar()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("{}: parameter '{}' must be a scalar", where, key));
    }
    out.set(key, kv.second.Scalar());
  }
  return out;
}

constexpr std::array<std::string_view, 5> kConfigFields = {
    "Config", "NumRuns", "Parameters", "Method", "Ablation"};

bool is_config_field(const std::string& key) {
  return std::find(kConfigFields.begin(), kConfigFields.end(), key) !=
         kConfigFields.end();
}

std::string required_string(const YAML::Node& node, const char* field,
                            const std::string& where) {
  const YAML::Node v = node[field];
  if (!v) {
    fail(ExperimentErrorKind::kMissingField,
         fmt::format("{}: missing field '{}'", where, field));
  }
  if (!v.IsScalar() || v.Scalar().empty()) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("{}: '{}' must be a nonempty string", where, field));
  }
  return v.Scalar();
}

ExperimentConfig parse_one(const std::string& name, const YAML::Node& node) {
  if (!node.IsMap()) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("experiment '{}' must be a map", name));
  }
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!is_config_field(key)) {
      fail(ExperimentErrorKind::kUnknownField,
           fmt::format("experiment '{}': unknown field '{}'", name, key));
    }
  }
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.config_path = required_string(node, "Config", name);
  cfg.method = required_string(node, "Method", name);

  const YAML::Node runs = node["NumRuns"];
  if (!runs) {
    fail(ExperimentErrorKind::kMissingField,
         fmt::format("{}: missing field 'NumRuns'", name));
  }
  long long n = 0;
  if (!runs.IsScalar() || !YAML::convert<long long>::decode(runs, n)) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("{}: NumRuns must be an integer", name));
  }
  if (n < 1) {
    fail(ExperimentErrorKind::kBadType,
         fmt::format("{}: NumRuns must be at least 1, got {}", name, n));
  }
  cfg.num_runs = static_cast<std::size_t>(n);
  cfg.parameters = parse_parameter_node(node["Parameters"], name);
  if (const YAML::Node abl = node["Ablation"]; abl) {
    if (!abl.IsScalar() || abl.Scalar().empty()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("{}: Ablation must be a path", name));
    }
    cfg.ablation_path = abl.Scalar();
  }
  return cfg;
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::vector<std::string> split_ws(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

MethodSpec mock_spec(const std::filesystem::path& self_exe, std::string name,
                     ParameterMap params) {
  MethodSpec m;
  m.name = std::move(name);
  m.command = {self_exe.string(), "mock-method"};
  m.default_parameters = std::move(params);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

ParameterMap::ParameterMap(std::initializer_list<Entry> entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

void ParameterMap::set(const std::string& name, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(name, std::move(value));
}

const std::string* ParameterMap::find(std::string_view name) const {
  for (const auto& [k, v] : entries_) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::optional<double> ParameterMap::get_double(std::string_view name) const {
  const std::string* v = find(name);
  if (!v) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    fail(ExperimentErrorKind::kInvalidValue,
         fmt::format("parameter '{}' = '{}' is not a number", name, *v));
  }
  return out;
}

std::optional<long long> ParameterMap::get_int(std::string_view name) const {
  const std::string* v = find(name);
  if (!v) return std::nullopt;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    fail(ExperimentErrorKind::kInvalidValue,
         fmt::format("parameter '{}' = '{}' is not an integer", name, *v));
  }
  return out;
}

ParameterMap ParameterMap::merged(const ParameterMap& overrides) const {
  ParameterMap out = *this;
  for (const auto& [k, v] : overrides.entries()) out.set(k, v);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ExperimentConfig> parse_experiment_config(
    std::string_view text, const std::string& default_name) {
  const YAML::Node root = load_yaml(text, "experiment config");
  std::vector<ExperimentConfig> out;
  if (!root || root.IsNull()) return out;
  if (!root.IsMap()) {
    fail(ExperimentErrorKind::kBadType,
         "experiment config must be a map of experiments");
  }
  bool flat = false;
  for (const auto& kv : root) {
    if (is_config_field(kv.first.as<std::string>())) flat = true;
  }
  if (flat) {
    out.push_back(parse_one(default_name, root));
    return out;
  }
  std::set<std::string> seen;
  for (const auto& kv : root) {
    const std::string name = kv.first.as<std::string>();
    if (!seen.insert(name).second) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("experiment '{}' defined twice", name));
    }
    out.push_back(parse_one(name, kv.second));
  }
  return out;
}

std::vector<ExperimentConfig> load_experiment_config(
    const std::filesystem::path& path) {
  auto configs =
      parse_experiment_config(read_file(path), path.stem().string());
  for (auto& c : configs) c.source_dir = path.parent_path();
  return configs;
}

std::filesystem::path resolve_config_path(
    const std::filesystem::path& source_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (!source_dir.empty() && std::filesystem::exists(source_dir / p)) {
    return source_dir / p;
  }
  return p;
}

// ---------------------------------------------------------------------------

std::size_t SequenceSet::num_sequences() const {
  std::size_t n = 0;
  for (const auto& [d, seqs] : datasets) n += seqs.size();
  return n;
}

SequenceSet parse_sequence_set(std::string_view text) {
  const YAML::Node root = load_yaml(text, "sequence set");
  SequenceSet out;
  if (!root || root.IsNull()) return out;
  if (!root.IsMap()) {
    fail(ExperimentErrorKind::kBadType,
         "sequence set must map dataset names to sequence lists");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& kv : root) {
    const std::string dataset = kv.first.as<std::string>();
    std::vector<std::string> names;
    const YAML::Node& v = kv.second;
    if (v.IsScalar()) {
      names.push_back(v.Scalar());
    } else if (v.IsSequence()) {
      for (const auto& item : v) {
        if (!item.IsScalar()) {
          fail(ExperimentErrorKind::kBadType,
               fmt::format("dataset '{}': sequence names must be strings",
                           dataset));
        }
        names.push_back(item.Scalar());
      }
    } else if (!v.IsNull()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("dataset '{}' must list sequences", dataset));
    }
    auto it = std::find_if(out.datasets.begin(), out.datasets.end(),
                           [&](const auto& d) { return d.first == dataset; });
    if (it == out.datasets.end()) {
      out.datasets.emplace_back(dataset, std::vector<std::string>{});
      it = std::prev(out.datasets.end());
    }
    for (auto& n : names) {
      if (!seen.insert({dataset, n}).second) {
        fail(ExperimentErrorKind::kDuplicateSequence,
             fmt::format("sequence '{}' of dataset '{}' listed twice", n,
                         dataset));
      }
      it->second.push_back(std::move(n));
    }
  }
  return out;
}

SequenceSet load_sequence_set(const std::filesystem::path& path) {
  return parse_sequence_set(read_file(path));
}

// ---------------------------------------------------------------------------

AblationTable parse_ablation(std::string_view text) {
  AblationTable table;
  bool have_header = false;
  bool comma = false;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    if (!have_header) comma = line.find(',') != std::string::npos;
    if (comma) {
      for (const auto& f : csv::split(line)) fields.push_back(trim(f));
    } else {
      fields = split_ws(line);
    }
    if (!have_header) {
      if (fields.empty() || fields.front() != "exp_id") {
        fail(ExperimentErrorKind::kMalformedRow,
             fmt::format("ablation line {}: header must start with exp_id",
                         line_no));
      }
      std::set<std::string> names;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty() || !names.insert(fields[i]).second) {
          fail(ExperimentErrorKind::kMalformedRow,
               fmt::format("ablation line {}: bad column name '{}'", line_no,
                           fields[i]));
        }
        table.columns.push_back(fields[i]);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size() + 1) {
      fail(ExperimentErrorKind::kMalformedRow,
           fmt::format("ablation line {}: expected {} fields, got {}", line_no,
                       table.columns.size() + 1, fields.size()));
    }
    std::size_t id = 0;
    if (!parse_size(fields[0], id)) {
      fail(ExperimentErrorKind::kMalformedRow,
           fmt::format("ablation line {}: exp_id '{}' is not a non-negative "
                       "integer",
                       line_no, fields[0]));
    }
    ParameterMap row;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (!fields[i + 1].empty()) row.set(table.columns[i], fields[i + 1]);
    }
    if (!table.rows.emplace(id, std::move(row)).second) {
      fail(ExperimentErrorKind::kDuplicateExpId,
           fmt::format("ablation line {}: exp_id {} repeated", line_no, id));
    }
  }
  if (!have_header) {
    fail(ExperimentErrorKind::kMalformedRow, "ablation file has no header");
  }
  return table;
}

AblationTable load_ablation(const std::filesystem::path& path) {
  return parse_ablation(read_file(path));
}

std::map<std::size_t, ParameterMap> expand_ablation(
    const ParameterMap& base, const AblationTable& ablation) {
  std::map<std::size_t, ParameterMap> out;
  for (const auto& [id, overrides] : ablation.rows) {
    out.emplace(id, base.merged(overrides));
  }
  return out;
}

std::map<std::size_t, ParameterMap> expand_ablation(const ParameterMap& base,
                                                    std::string_view csv_text) {
  return expand_ablation(base, parse_ablation(csv_text));
}

ParameterMap parameters_for_run(const ParameterMap& base,
                                const AblationTable* ablation,
                                std::size_t run_index) {
  if (ablation) {
    if (const auto it = ablation->rows.find(run_index);
        it != ablation->rows.end()) {
      return base.merged(it->second);
    }
  }
  return base;
}

std::string format_exp_id(std::size_t index) {
  if (index >= 100000) {
    fail(ExperimentErrorKind::kExpIdOverflow,
         fmt::format("run counter {} does not fit a 5-digit exp_id", index));
  }
  return fmt::format("{:05d}", index);
}

std::size_t parse_exp_id(std::string_view text) {
  std::size_t v = 0;
  if (text.size() != 5 || !parse_size(text, v)) {
    fail(ExperimentErrorKind::kInvalidValue,
         fmt::format("'{}' is not a 5-digit exp_id", text));
  }
  return v;
}

// ---------------------------------------------------------------------------

void MethodRegistry::add(MethodSpec method) {
  for (auto& m : methods_) {
    if (m.name == method.name) {
      m = std::move(method);
      return;
    }
  }
  methods_.push_back(std::move(method));
}

const MethodSpec& MethodRegistry::get(const std::string& name) const {
  for (const auto& m : methods_) {
    if (m.name == name) return m;
  }
  fail(ExperimentErrorKind::kUnknownMethod,
       fmt::format("method '{}' is not registered (known: {})", name,
                   fmt::join(names(), ", ")));
}

bool MethodRegistry::contains(const std::string& name) const {
  return std::any_of(methods_.begin(), methods_.end(),
                     [&](const auto& m) { return m.name == name; });
}

std::vector<std::string> MethodRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& m : methods_) out.push_back(m.name);
  return out;
}

MethodRegistry builtin_methods(const std::filesystem::path& self_exe) {
  MethodRegistry r;
  r.add(mock_spec(self_exe, "mock",
                  {{"sigma_pos", "0.01"},
                   {"sigma_rot", "0.001"},
                   {"scale", "1"},
                   {"drift_per_frame", "0"},
                   {"keyframe_stride", "1"}}));
  r.add(mock_spec(self_exe, "mock_precise",
                  {{"sigma_pos", "0.005"},
                   {"sigma_rot", "0.0005"},
                   {"scale", "1"},
                   {"drift_per_frame", "0"},
                   {"keyframe_stride", "1"}}));
  // Monocular-like: unknown scale, drift, keyframes only.
  r.add(mock_spec(self_exe, "mock_noisy",
                  {{"sigma_pos", "0.05"},
                   {"sigma_rot", "0.005"},
                   {"scale", "0.7"},
                   {"drift_per_frame", "0.002"},
                   {"keyframe_stride", "2"}}));
  return r;
}

void load_methods_yaml(MethodRegistry& registry,
                       const std::filesystem::path& path) {
  const YAML::Node root = load_yaml(read_file(path), "methods file");
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) {
    fail(ExperimentErrorKind::kBadType, "methods file must be a map");
  }
  const auto dir = path.parent_path();
  for (const auto& kv : root) {
    MethodSpec m;
    m.name = kv.first.as<std::string>();
    const YAML::Node& node = kv.second;
    if (!node.IsMap()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("method '{}' must be a map", m.name));
    }
    for (const auto& f : node) {
      const std::string key = f.first.as<std::string>();
      if (key != "command" && key != "folder" && key != "parameters" &&
          key != "settings_template") {
        fail(ExperimentErrorKind::kUnknownField,
             fmt::format("method '{}': unknown field '{}'", m.name, key));
      }
    }
    const YAML::Node cmd = node["command"];
    if (!cmd) {
      fail(ExperimentErrorKind::kMissingField,
           fmt::format("method '{}': missing field 'command'", m.name));
    }
    if (cmd.IsScalar()) {
      m.command = split_ws(cmd.Scalar());
    } else if (cmd.IsSequence()) {
      for (const auto& c : cmd) {
        if (!c.IsScalar()) {
          fail(ExperimentErrorKind::kBadType,
               fmt::format("method '{}': command entries must be strings",
                           m.name));
        }
        m.command.push_back(c.Scalar());
      }
    }
    if (m.command.empty()) {
      fail(ExperimentErrorKind::kBadType,
           fmt::format("method '{}': empty command", m.name));
    }
    if (const auto folder = node["folder"]; folder) {
      m.folder = resolve_config_path(dir, folder.as<std::string>());
    }
    if (const auto tmpl = node["settings_template"]; tmpl) {
      m.settings_template = resolve_config_path(dir, tmpl.as<std::string>());
    }
    m.default_parameters =
        parse_parameter_node(node["parameters"], "method " + m.name);
    registry.add(std::move(m));
  }
}

// ---------------------------------------------------------------------------

std::string render_settings(std::string_view template_text,
                            const ParameterMap& parameters) {
  std::string out;
  std::set<std::string> used;
  for (const auto& line : split_lines(template_text)) {
    const auto colon = line.find(':');
    const bool top_level = !line.empty() && line.front() != ' ' &&
                           line.front() != '\t' && line.front() != '#';
    if (top_level && colon != std::string::npos) {
      const std::string key = trim(std::string_view(line).substr(0, colon));
      if (const std::string* v = parameters.find(key)) {
        out += fmt::format("{}: {}\n", key, *v);
        used.insert(key);
        continue;
      }
    }
    out += line;
    out += '\n';
  }
  // split_lines yields a trailing empty line for text ending in '\n'.
  while (out.size() >= 2 && out[out.size() - 1] == '\n' &&
         out[out.size() - 2] == '\n') {
    out.pop_back();
  }
  if (out == "\n") out.clear();
  for (const auto& [k, v] : parameters.entries()) {
    if (!used.count(k)) out += fmt::format("{}: {}\n", k, v);
  }
  return out;
}

ParameterMap parse_settings(std::string_view text) {
  ParameterMap out;
  for (const auto& raw : split_lines(text)) {
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '%' ||
        line == "---") {
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string value = trim(std::string_view(line).substr(colon + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    out.set(trim(std::string_view(line).substr(0, colon)), std::move(value));
  }
  return out;
}

}  // namespace trajbench
