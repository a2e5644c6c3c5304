#include "trajbench/adapter.h"

#include <fcntl.h>
#include <fmt/format.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include "trajbench/download.h"
#include "trajbench/fs_util.h"
#include "trajbench/process.h"

namespace trajbench {

namespace fs = std::filesystem;

namespace {

// flock()-based exclusive lock released on destruction.
class FileLock {
 public:
  explicit FileLock(const fs::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      throw DatasetError(DatasetErrorKind::kLocked,
                         fmt::format("cannot lock '{}'", path.string()));
    }
  }
  ~FileLock() {
    std::error_code ec;
    fs::remove(path_, ec);
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

void remove_quietly(const fs::path& p) {
  std::error_code ec;
  fs::remove_all(p, ec);
}

double round_micro(double t) { return std::round(t * 1e6) / 1e6; }

}  // namespace

bool DatasetAdapter::knows(const std::string& sequence) const {
  const auto cat = catalog();
  return std::find(cat.begin(), cat.end(), sequence) != cat.end();
}

SequenceLayout prepare_sequence(DatasetAdapter& adapter,
                                const std::string& sequence,
                                const fs::path& dataset_root) {
  if (!adapter.knows(sequence)) {
    throw DatasetError(DatasetErrorKind::kUnknownSequence,
                       fmt::format("dataset '{}' has no sequence '{}'",
                                   adapter.name(), sequence));
  }
  const fs::path target = dataset_root / sequence;
  if (fs::exists(target) && validate_sequence(target).ok()) {
    return {target};
  }

  ensure_writable_directory(dataset_root / ".staging");
  const fs::path staging_root = dataset_root / ".staging";
  FileLock lock(staging_root / (sequence + ".lock"));
  if (fs::exists(target) && validate_sequence(target).ok()) {
    return {target};
  }

  PrepareContext ctx;
  ctx.sequence = sequence;
  ctx.dataset_root = dataset_root;
  ctx.staging = staging_root / sequence;
  ctx.scratch = staging_root / (sequence + ".download");
  remove_quietly(ctx.staging);
  fs::create_directories(ctx.staging);
  fs::create_directories(ctx.scratch);

  try {
    adapter.download_sequence_data(ctx);
    adapter.create_rgb_folder(ctx);
    adapter.create_calibration_yaml(ctx);
    adapter.create_rgb_csv(ctx);
    adapter.create_groundtruth_csv(ctx);
  } catch (...) {
    remove_quietly(ctx.staging);
    throw;
  }

  const ValidationReport report = validate_sequence(ctx.staging);
  if (!report.ok()) {
    remove_quietly(ctx.staging);
    throw DatasetError(DatasetErrorKind::kValidationFailed, report.summary());
  }
  remove_quietly(target);
  fs::rename(ctx.staging, target);
  remove_quietly(ctx.scratch);
  return {target};
}

// ---------------------------------------------------------------------------
// synthetic

SyntheticAdapter::SyntheticAdapter(SyntheticOptions options)
    : options_(options) {}

std::vector<std::string> SyntheticAdapter::catalog() const {
  return {"sequence_00", "sequence_01", "sequence_02", "sequence_03"};
}

bool SyntheticAdapter::knows(const std::string& sequence) const {
  static const std::regex kName(R"([A-Za-z0-9][A-Za-z0-9_.-]*)");
  return std::regex_match(sequence, kName);
}

std::uint64_t SyntheticAdapter::sequence_seed(
    const std::string& sequence) const {
  return stable_hash(fmt::format("{}/{}", options_.seed, sequence));
}

CameraCalibration SyntheticAdapter::calibration() const {
  CameraCalibration c;
  c.width = options_.width;
  c.height = options_.height;
  c.fx = c.fy = 0.8 * options_.width;
  c.cx = 0.5 * options_.width;
  c.cy = 0.5 * options_.height;
  c.fps = options_.fps;
  return c;
}

Trajectory SyntheticAdapter::ground_truth(const std::string& sequence) const {
  std::mt19937_64 rng(sequence_seed(sequence));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double radius = 1.5 + 1.5 * uni(rng);
  const double phase = 2.0 * std::numbers::pi * uni(rng);
  const double period = 8.0 + 8.0 * uni(rng);  // seconds per lap
  const double height_amp = 0.1 + 0.4 * uni(rng);
  const double height_freq = 0.2 + 0.6 * uni(rng);  // Hz
  const double omega = 2.0 * std::numbers::pi / period;

  std::vector<TrajectoryEntry> entries;
  entries.reserve(options_.num_frames);
  for (std::size_t k = 0; k < options_.num_frames; ++k) {
    const double t = round_micro(static_cast<double>(k) / options_.fps);
    const double angle = phase + omega * t;
    const Eigen::Vector3d p(
        radius * std::cos(angle), radius * std::sin(angle),
        height_amp * std::sin(2.0 * std::numbers::pi * height_freq * t));
    // Camera looks at the circle center: yaw about z, half-angle form.
    const double yaw = angle + std::numbers::pi;
    const Quaternion q{0.0, 0.0, std::sin(0.5 * yaw), std::cos(0.5 * yaw)};
    entries.push_back({t, PoseSE3(p, q)});
  }
  return Trajectory(std::move(entries));
}

void SyntheticAdapter::download_sequence_data(const PrepareContext&) {}

void SyntheticAdapter::create_rgb_folder(const PrepareContext& ctx) {
  fs::create_directories(ctx.layout().rgb_dir());
  std::mt19937_64 rng(sequence_seed(ctx.sequence) ^ 0x9e3779b97f4a7c15ULL);
  const double base_phase = static_cast<double>(rng() % 1000) / 1000.0 * 6.28;
  for (std::size_t k = 0; k < options_.num_frames; ++k) {
    Image img(options_.width, options_.height, 1);
    const double level =
        60.0 + 120.0 * (0.5 + 0.5 * std::sin(base_phase + 0.05 * k));
    for (auto& px : img.pixels) {
      const int noise = static_cast<int>(rng() % 17) - 8;
      px = static_cast<std::uint8_t>(
          std::clamp(static_cast<int>(level) + noise, 0, 255));
    }
    write_image(
        (ctx.layout().rgb_dir() / rgb_filename(k, options_.num_frames, "png"))
            .string(),
        img);
  }
}

void SyntheticAdapter::create_calibration_yaml(const PrepareContext& ctx) {
  write_file_atomic(ctx.layout().calibration_yaml(),
                    format_calibration_yaml(calibration()));
}

void SyntheticAdapter::create_rgb_csv(const PrepareContext& ctx) {
  std::vector<RgbRow> rows;
  rows.reserve(options_.num_frames);
  for (std::size_t k = 0; k < options_.num_frames; ++k) {
    rows.push_back(
        {round_micro(static_cast<double>(k) / options_.fps),
         "rgb/" + rgb_filename(k, options_.num_frames, "png")});
  }
  save_rgb_csv(ctx.layout().rgb_csv(), rows);
}

void SyntheticAdapter::create_groundtruth_csv(const PrepareContext& ctx) {
  save_groundtruth_csv(ctx.layout().groundtruth_csv(),
                       ground_truth(ctx.sequence));
}

// ---------------------------------------------------------------------------
// TUM RGB-D

namespace {

struct TumListEntry {
  std::string stamp_text;
  double stamp = 0.0;
  std::string file;
};

std::vector<TumListEntry> read_tum_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DatasetError(DatasetErrorKind::kMalformedFile,
                       fmt::format("missing '{}'", path.string()));
  }
  std::vector<TumListEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    TumListEntry e;
    if (!(ss >> e.stamp_text >> e.file)) continue;
    e.stamp = std::stod(e.stamp_text);
    out.push_back(std::move(e));
  }
  return out;
}

int freiburg_camera(const std::string& sequence) {
  static const std::regex kName(R"(freiburg([123])_[A-Za-z0-9_]+)");
  std::smatch m;
  if (!std::regex_match(sequence, m, kName)) return 0;
  return std::stoi(m[1].str());
}

}  // namespace

TumRgbdAdapter::TumRgbdAdapter(std::string base_url)
    : base_url_(std::move(base_url)) {}

std::vector<std::string> TumRgbdAdapter::catalog() const {
  return {"freiburg1_xyz",
          "freiburg1_desk",
          "freiburg1_desk2",
          "freiburg1_room",
          "freiburg2_xyz",
          "freiburg2_desk",
          "freiburg3_long_office_household",
          "freiburg3_structure_texture_far",
          "freiburg3_nostructure_texture_far",
          "freiburg3_walking_xyz"};
}

bool TumRgbdAdapter::knows(const std::string& sequence) const {
  return freiburg_camera(sequence) != 0;
}

CameraCalibration TumRgbdAdapter::calibration_for(const std::string& sequence) {
  CameraCalibration c;
  c.width = 640;
  c.height = 480;
  c.fps = 30.0;
  switch (freiburg_camera(sequence)) {
    case 1:
      c.fx = 517.3, c.fy = 516.5, c.cx = 318.6, c.cy = 255.3;
      c.k1 = 0.2624, c.k2 = -0.9531, c.p1 = -0.0054, c.p2 = 0.0026,
      c.k3 = 1.1633;
      break;
    case 2:
      c.fx = 520.9, c.fy = 521.0, c.cx = 325.1, c.cy = 249.7;
      c.k1 = 0.2312, c.k2 = -0.7849, c.p1 = -0.0033, c.p2 = -0.0001,
      c.k3 = 0.9172;
      break;
    case 3:
      c.fx = 535.4, c.fy = 539.2, c.cx = 320.1, c.cy = 247.6;
      break;
    default:
      throw DatasetError(DatasetErrorKind::kUnknownSequence,
                         fmt::format("'{}' is not a freiburg sequence",
                                     sequence));
  }
  return c;
}

std::string TumRgbdAdapter::archive_url(const std::string& sequence) const {
  return fmt::format("{}/freiburg{}/rgbd_dataset_{}.tgz", base_url_,
                     freiburg_camera(sequence), sequence);
}

fs::path TumRgbdAdapter::extracted_dir(const PrepareContext& ctx) const {
  return ctx.scratch / ("rgbd_dataset_" + ctx.sequence);
}

void TumRgbdAdapter::download_sequence_data(const PrepareContext& ctx) {
  const std::string url = archive_url(ctx.sequence);
  const fs::path archive = ctx.scratch / ("rgbd_dataset_" + ctx.sequence + ".tgz");
  download_file(url, archive);
  try {
    verify_checksum(ctx.dataset_root / "checksums.txt", archive);
  } catch (const DatasetError&) {
    std::error_code ec;
    fs::remove(archive, ec);
    throw;
  }

  remove_quietly(extracted_dir(ctx));
  ProcessOptions opts;
  opts.log_path = ctx.scratch / "extract.log";
  opts.timeout = std::chrono::minutes(30);
  const ProcessResult r = run_process(
      {"tar", "-xzf", archive.string(), "-C", ctx.scratch.string()}, opts);
  if (r.status != ProcessResult::Status::kExited || r.exit_code != 0) {
    std::error_code ec;
    fs::remove(archive, ec);  // a corrupt archive must not be resumed
    throw DatasetError(
        DatasetErrorKind::kDownloadFailed,
        fmt::format("download of '{}' failed: archive does not extract "
                    "(tar exit {})",
                    url, r.exit_code));
  }
  if (!fs::is_directory(extracted_dir(ctx))) {
    throw DatasetError(
        DatasetErrorKind::kDownloadFailed,
        fmt::format("download of '{}' failed: archive lacks '{}'", url,
                    extracted_dir(ctx).filename().string()));
  }
}

void TumRgbdAdapter::create_rgb_folder(const PrepareContext& ctx) {
  const fs::path src = extracted_dir(ctx);
  const auto list = read_tum_list(src / "rgb.txt");
  const UndistortMap map(calibration_for(ctx.sequence));
  fs::create_directories(ctx.layout().rgb_dir());
  for (std::size_t k = 0; k < list.size(); ++k) {
    const Image img = read_image((src / list[k].file).string());
    write_image(
        (ctx.layout().rgb_dir() / rgb_filename(k, list.size(), "png")).string(),
        map.apply(img));
  }
}

void TumRgbdAdapter::create_calibration_yaml(const PrepareContext& ctx) {
  const CameraCalibration original = calibration_for(ctx.sequence);
  const std::vector<std::string> comments = {
      "frames undistorted during preparation; original coefficients:",
      fmt::format("k1={} k2={} p1={} p2={} k3={}", original.k1, original.k2,
                  original.p1, original.p2, original.k3)};
  write_file_atomic(
      ctx.layout().calibration_yaml(),
      format_calibration_yaml(original.without_distortion(), comments));
}

void TumRgbdAdapter::create_rgb_csv(const PrepareContext& ctx) {
  const auto list = read_tum_list(extracted_dir(ctx) / "rgb.txt");
  std::vector<RgbRow> rows;
  rows.reserve(list.size());
  for (std::size_t k = 0; k < list.size(); ++k) {
    rows.push_back({list[k].stamp, "rgb/" + rgb_filename(k, list.size(), "png")});
  }
  save_rgb_csv(ctx.layout().rgb_csv(), rows);
}

void TumRgbdAdapter::create_groundtruth_csv(const PrepareContext& ctx) {
  const fs::path gt = extracted_dir(ctx) / "groundtruth.txt";
  if (!fs::exists(gt)) return;
  save_groundtruth_csv(ctx.layout().groundtruth_csv(),
                       load_trajectory(gt.string()));
}

std::unique_ptr<DatasetAdapter> make_adapter(const std::string& dataset,
                                             std::uint64_t seed) {
  if (dataset == "synthetic") {
    SyntheticOptions opts;
    opts.seed = seed;
    return std::make_unique<SyntheticAdapter>(opts);
  }
  if (dataset == "tum_rgbd" || dataset == "rgbdtum") {
    const char* base = std::getenv("TRAJBENCH_TUM_BASE_URL");
    return std::make_unique<TumRgbdAdapter>(
        base ? base : TumRgbdAdapter::kDefaultBaseUrl);
  }
  return nullptr;
}

}  // namespace trajbench
