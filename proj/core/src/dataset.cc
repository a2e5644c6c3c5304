#include "trajbench/dataset.h"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include "trajbench/csv.h"
#include "trajbench/fs_util.h"

namespace trajbench {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void malformed(const std::string& what) {
  throw DatasetError(DatasetErrorKind::kMalformedFile, what);
}

}  // namespace

int rgb_filename_width(std::size_t total) {
  int digits = 1;
  for (std::size_t t = total > 0 ? total - 1 : 0; t >= 10; t /= 10) ++digits;
  return std::max(4, digits);
}

std::string rgb_filename(std::size_t index, std::size_t total,
                         std::string_view extension) {
  return fmt::format("rgb_{:0{}d}.{}", index, rgb_filename_width(total),
                     extension);
}

std::string format_rgb_csv(const std::vector<RgbRow>& rows) {
  std::string out = std::string(kRgbCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.6f},{}\n", r.timestamp, csv::escape(r.path));
  }
  return out;
}

std::vector<RgbRow> parse_rgb_csv(std::string_view text) {
  const csv::Table table = csv::parse_table(text);
  if (table.header.size() != 2 || table.header[0] != "ts" ||
      table.header[1] != "path") {
    malformed(fmt::format("rgb.csv header must be '{}'", kRgbCsvHeader));
  }
  std::vector<RgbRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    RgbRow row;
    if (r.size() != 2 || !to_double(r[0], row.timestamp) || r[1].empty()) {
      malformed(fmt::format("rgb.csv row {} is malformed", i + 2));
    }
    row.path = r[1];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RgbRow> load_rgb_csv(const fs::path& path) {
  return parse_rgb_csv(read_file(path));
}

void save_rgb_csv(const fs::path& path, const std::vector<RgbRow>& rows) {
  write_file_atomic(path, format_rgb_csv(rows));
}

void save_groundtruth_csv(const fs::path& path, const Trajectory& trajectory) {
  write_file_atomic(path, std::string(kGroundTruthCsvHeader) + "\n" +
                              serialize_trajectory(trajectory,
                                                   Separator::kComma));
}

std::string format_calibration_yaml(const CameraCalibration& c,
                                    const std::vector<std::string>& comments) {
  using csv::format_double;
  std::string out = "%YAML:1.0\n";
  for (const auto& line : comments) out += "# " + line + "\n";
  out += "Camera.model: \"PINHOLE\"\n";
  out += fmt::format("Camera.fx: {}\n", format_double(c.fx));
  out += fmt::format("Camera.fy: {}\n", format_double(c.fy));
  out += fmt::format("Camera.cx: {}\n", format_double(c.cx));
  out += fmt::format("Camera.cy: {}\n", format_double(c.cy));
  out += fmt::format("Camera.k1: {}\n", format_double(c.k1));
  out += fmt::format("Camera.k2: {}\n", format_double(c.k2));
  out += fmt::format("Camera.p1: {}\n", format_double(c.p1));
  out += fmt::format("Camera.p2: {}\n", format_double(c.p2));
  out += fmt::format("Camera.k3: {}\n", format_double(c.k3));
  out += fmt::format("Camera.w: {}\n", c.width);
  out += fmt::format("Camera.h: {}\n", c.height);
  out += fmt::format("Camera.fps: {}\n", format_double(c.fps));
  return out;
}

CameraCalibration parse_calibration_yaml(std::string_view text) {
  std::map<std::string, std::string, std::less<>> values;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '%') {
      if (!first_content || line.substr(0, 5) != "%YAML") {
        malformed(fmt::format("calibration.yaml line {}: unexpected directive",
                              line_no));
      }
      first_content = false;
      continue;
    }
    if (first_content) {
      malformed("calibration.yaml must start with a %YAML:1.0 directive");
    }
    if (line == "---") continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      malformed(fmt::format("calibration.yaml line {}: expected 'key: value'",
                            line_no));
    }
    std::string_view value = trim(line.substr(colon + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    values[std::string(trim(line.substr(0, colon)))] = std::string(value);
  }
  if (first_content) {
    malformed("calibration.yaml must start with a %YAML:1.0 directive");
  }

  auto number = [&](const char* key, bool required,
                    double fallback = 0.0) -> double {
    const auto it = values.find(key);
    if (it == values.end()) {
      if (required) malformed(fmt::format("calibration.yaml lacks {}", key));
      return fallback;
    }
    double v = 0.0;
    if (!to_double(it->second, v)) {
      malformed(fmt::format("calibration.yaml: {} is not a number", key));
    }
    return v;
  };

  const auto model = values.find("Camera.model");
  if (model != values.end() && model->second != "PINHOLE") {
    malformed(fmt::format("unsupported camera model '{}'", model->second));
  }
  CameraCalibration c;
  c.fx = number("Camera.fx", true);
  c.fy = number("Camera.fy", true);
  c.cx = number("Camera.cx", true);
  c.cy = number("Camera.cy", true);
  c.k1 = number("Camera.k1", false);
  c.k2 = number("Camera.k2", false);
  c.p1 = number("Camera.p1", false);
  c.p2 = number("Camera.p2", false);
  c.k3 = number("Camera.k3", false);
  const double w = number("Camera.w", true);
  const double h = number("Camera.h", true);
  if (w != std::floor(w) || h != std::floor(h)) {
    malformed("calibration.yaml: Camera.w and Camera.h must be integers");
  }
  c.width = static_cast<int>(w);
  c.height = static_cast<int>(h);
  c.fps = number("Camera.fps", true);
  try {
    validate_calibration(c);
  } catch (const CameraError& e) {
    malformed(e.what());
  }
  return c;
}

CameraCalibration load_calibration_yaml(const fs::path& path) {
  return parse_calibration_yaml(read_file(path));
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::string out = fmt::format("validation of {}\n", root.string());
  for (const auto& c : checks) {
    out += fmt::format("  [{}] {}{}\n", c.passed ? "PASS" : "FAIL", c.name,
                       c.detail.empty() ? "" : ": " + c.detail);
  }
  return out;
}

ValidationReport validate_sequence(const fs::path& root) {
  ValidationReport report;
  report.root = root;
  auto add = [&](std::string name, bool passed, std::string detail = {}) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };
  const SequenceLayout layout{root};

  if (!fs::is_directory(root)) {
    add("sequence directory exists", false, root.string());
    return report;
  }
  add("sequence directory exists", true);
  add("rgb directory exists", fs::is_directory(layout.rgb_dir()),
      layout.rgb_dir().string());

  std::optional<CameraCalibration> calib;
  try {
    calib = load_calibration_yaml(layout.calibration_yaml());
    add("calibration.yaml parses", true);
  } catch (const Error& e) {
    add("calibration.yaml parses", false, e.what());
  }

  std::vector<RgbRow> rows;
  bool rows_ok = false;
  try {
    rows = load_rgb_csv(layout.rgb_csv());
    rows_ok = true;
    add("rgb.csv parses", !rows.empty(),
        rows.empty() ? "no frames listed" : fmt::format("{} frames", rows.size()));
  } catch (const Error& e) {
    add("rgb.csv parses", false, e.what());
  }

  if (rows_ok) {
    std::string detail;
    for (std::size_t i = 1; i < rows.size() && detail.empty(); ++i) {
      if (!(rows[i].timestamp > rows[i - 1].timestamp)) {
        detail = fmt::format("line {}: timestamp {:.6f} does not follow {:.6f}",
                             i + 2, rows[i].timestamp, rows[i - 1].timestamp);
      }
    }
    add("rgb.csv timestamps strictly increasing", detail.empty(), detail);

    std::vector<std::string> missing;
    for (const auto& r : rows) {
      if (!fs::is_regular_file(root / r.path)) missing.push_back(r.path);
    }
    add("rgb.csv files exist", missing.empty(),
        missing.empty() ? ""
                        : fmt::format("{} missing, first: {}", missing.size(),
                                      missing.front()));

    const std::regex pattern(R"(rgb/rgb_(\d{4,})\.([A-Za-z0-9]+))");
    std::string naming;
    for (std::size_t i = 0; i < rows.size() && naming.empty(); ++i) {
      std::smatch m;
      if (!std::regex_match(rows[i].path, m, pattern)) {
        naming = fmt::format("'{}' does not match rgb/rgb_NNNN.<ext>",
                             rows[i].path);
      } else if (std::stoull(m[1].str()) != i) {
        naming = fmt::format("'{}' is row {} (ordinal mismatch)", rows[i].path,
                             i);
      } else if (m[1].length() != rgb_filename_width(rows.size())) {
        naming = fmt::format("'{}' should be padded to {} digits",
                             rows[i].path, rgb_filename_width(rows.size()));
      }
    }
    add("rgb filenames zero-padded and ordered", naming.empty(), naming);

    if (calib && !rows.empty() && missing.empty()) {
      try {
        const Image first = read_image((root / rows.front().path).string());
        const bool match =
            first.width == calib->width && first.height == calib->height;
        add("image size matches calibration", match,
            fmt::format("{}x{} vs {}x{}", first.width, first.height,
                        calib->width, calib->height));
      } catch (const Error& e) {
        add("image size matches calibration", false, e.what());
      }
    }
  }

  if (fs::exists(layout.groundtruth_csv())) {
    try {
      const Trajectory gt = load_trajectory(layout.groundtruth_csv().string());
      add("groundtruth.csv parses", true, fmt::format("{} poses", gt.size()));
    } catch (const Error& e) {
      add("groundtruth.csv parses", false, e.what());
    }
  } else {
    add("groundtruth.csv parses", true, "absent (optional)");
  }
  return report;
}

std::vector<RgbRow> sample_frames(const std::vector<RgbRow>& rows,
                                  const FrameSelection& sel) {
  std::vector<RgbRow> out;
  std::optional<double> last_kept;
  const double min_gap =
      sel.target_fps && *sel.target_fps > 0.0 ? 1.0 / *sel.target_fps : 0.0;
  for (const auto& r : rows) {
    if (sel.segment_start && r.timestamp < *sel.segment_start) continue;
    if (sel.segment_end && r.timestamp > *sel.segment_end) continue;
    if (last_kept && r.timestamp < *last_kept + min_gap - 1e-6) continue;
    last_kept = r.timestamp;
    out.push_back(r);
  }
  if (sel.max_rgb && out.size() > *sel.max_rgb) out.resize(*sel.max_rgb);
  if (out.empty()) {
    throw DatasetError(DatasetErrorKind::kEmptySelection,
                       "frame selection left no frames");
  }
  return out;
}

}  // namespace trajbench
