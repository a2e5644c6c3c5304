#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajbench/camera.h"
#include "trajbench/error.h"
#include "trajbench/trajectory.h"

namespace trajbench {

enum class DatasetErrorKind {
  kDownloadFailed,
  kChecksumMismatch,
  kValidationFailed,
  kEmptySelection,
  kMalformedFile,
  kUnknownDataset,
  kUnknownSequence,
  kLocked,
};

using DatasetError = KindedError<DatasetErrorKind, ErrorCategory::kData>;

// Standardized on-disk sequence:
//   <root>/rgb/rgb_0000.png ...
//   <root>/rgb.csv
//   <root>/groundtruth.csv   (optional)
//   <root>/calibration.yaml
struct SequenceLayout {
  std::filesystem::path root;

  std::filesystem::path rgb_dir() const { return root / "rgb"; }
  std::filesystem::path rgb_csv() const { return root / "rgb.csv"; }
  std::filesystem::path groundtruth_csv() const {
    return root / "groundtruth.csv";
  }
  std::filesystem::path calibration_yaml() const {
    return root / "calibration.yaml";
  }
};

struct RgbRow {
  double timestamp = 0.0;  // seconds
  std::string path;        // relative to the sequence root
};

inline constexpr std::string_view kRgbCsvHeader = "ts,path";
inline constexpr std::string_view kGroundTruthCsvHeader =
    "ts,tx,ty,tz,qx,qy,qz,qw";

// "rgb/rgb_0042.png" style names: width >= 4, at least the digit count of
// the frame total.
std::string rgb_filename(std::size_t index, std::size_t total,
                         std::string_view extension);
int rgb_filename_width(std::size_t total);

std::string format_rgb_csv(const std::vector<RgbRow>& rows);
std::vector<RgbRow> parse_rgb_csv(std::string_view text);
std::vector<RgbRow> load_rgb_csv(const std::filesystem::path& path);
void save_rgb_csv(const std::filesystem::path& path,
                  const std::vector<RgbRow>& rows);

void save_groundtruth_csv(const std::filesystem::path& path,
                          const Trajectory& trajectory);

// OpenCV-style calibration: "%YAML:1.0" then flat "Camera.<key>: value".
// `comments` lines are emitted as '#' comments after the directive.
std::string format_calibration_yaml(const CameraCalibration& calib,
                                    const std::vector<std::string>& comments = {});
CameraCalibration parse_calibration_yaml(std::string_view text);
CameraCalibration load_calibration_yaml(const std::filesystem::path& path);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::filesystem::path root;
  std::vector<ValidationCheck> checks;

  bool ok() const;
  std::string summary() const;
};

// Checks every layout invariant; failures become report entries.
ValidationReport validate_sequence(const std::filesystem::path& root);

struct FrameSelection {
  std::optional<double> target_fps;
  std::optional<double> segment_start;
  std::optional<double> segment_end;
  std::optional<std::size_t> max_rgb;
};

// Segment filter, then rate decimation (keep t_k >= t_last + 1/fps - 1e-6),
// then truncation to max_rgb. Throws kEmptySelection when nothing is left.
std::vector<RgbRow> sample_frames(const std::vector<RgbRow>& rows,
                                  const FrameSelection& selection);

}  // namespace trajbench
