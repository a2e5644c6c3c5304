#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "trajbench/error.h"
#include "trajbench/experiment.h"
#include "trajbench/trajectory.h"

namespace trajbench {

enum class MockErrorKind { kMissingGroundTruth, kBadArguments };

using MockError = KindedError<MockErrorKind, ErrorCategory::kData>;

struct MockNoise {
  double sigma_pos = 0.0;        // m, per axis
  double sigma_rot = 0.0;        // rad, per axis of the axis-angle vector
  double scale = 1.0;
  double drift_per_frame = 0.0;  // m, per-axis random-walk step
  std::size_t keyframe_stride = 1;
  std::optional<std::size_t> fail_after_frame;  // emit frames [0, n) only
  std::uint64_t seed = 0;
};

// Reads the noise keys from a settings map. "seed" wins over the harness
// seed when both are present.
MockNoise mock_noise_from(const ParameterMap& settings);

// One pose per kept frame stamp: nearest ground-truth pose, perturbed.
// Noise is drawn for every frame, so the stride only thins the output.
Trajectory mock_trajectory(const Trajectory& ground_truth,
                           std::span<const double> frame_timestamps,
                           const MockNoise& noise);

struct MockInvocation {
  std::filesystem::path sequence_path;
  std::filesystem::path calib_yaml;
  std::filesystem::path rgb_csv;  // empty: <sequence_path>/rgb.csv
  std::string exp_id;
  std::filesystem::path settings_yaml;  // optional
  int visualization = 0;
  std::filesystem::path exp_folder;
};

// Per-field overrides from the command line; beat the settings file.
struct MockOverrides {
  std::optional<double> sigma_pos;
  std::optional<double> sigma_rot;
  std::optional<double> scale;
  std::optional<double> drift_per_frame;
  std::optional<std::size_t> keyframe_stride;
  std::optional<std::size_t> fail_after_frame;
  std::optional<std::uint64_t> seed;
};

// Writes <exp_folder>/<exp_id>.txt and returns its path.
std::filesystem::path run_mock_method(const MockInvocation& invocation,
                                      const MockOverrides& overrides = {});

}  // namespace trajbench
