#include "trajbench/mock_method.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "trajbench/dataset.h"
#include "trajbench/fs_util.h"

namespace trajbench {

namespace {

std::size_t nearest_index(const std::vector<double>& stamps, double t) {
  const auto it = std::lower_bound(stamps.begin(), stamps.end(), t);
  if (it == stamps.begin()) return 0;
  if (it == stamps.end()) return stamps.size() - 1;
  const auto hi = static_cast<std::size_t>(it - stamps.begin());
  return (t - stamps[hi - 1] <= stamps[hi] - t) ? hi - 1 : hi;
}

Quaternion axis_angle(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return {};
  const Eigen::Vector3d axis = v / angle;
  const double s = std::sin(angle / 2.0);
  return {axis.x() * s, axis.y() * s, axis.z() * s, std::cos(angle / 2.0)};
}

template <typename T>
void require_non_negative(const char* name, T value) {
  if (!(value >= 0)) {
    throw MockError(MockErrorKind::kBadArguments,
                    fmt::format("{} must be non-negative", name));
  }
}

}  // namespace

MockNoise mock_noise_from(const ParameterMap& settings) {
  MockNoise n;
  if (auto v = settings.get_double("sigma_pos")) n.sigma_pos = *v;
  if (auto v = settings.get_double("sigma_rot")) n.sigma_rot = *v;
  if (auto v = settings.get_double("scale")) n.scale = *v;
  if (auto v = settings.get_double("drift_per_frame")) n.drift_per_frame = *v;
  if (auto v = settings.get_int("keyframe_stride")) {
    require_non_negative("keyframe_stride", *v);
    n.keyframe_stride = static_cast<std::size_t>(*v);
  }
  if (auto v = settings.get_int("fail_after_frame"); v && *v >= 0) {
    n.fail_after_frame = static_cast<std::size_t>(*v);
  }
  if (auto v = settings.get_int(kHarnessSeedKey)) {
    n.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = settings.get_int("seed")) n.seed = static_cast<std::uint64_t>(*v);
  return n;
}

Trajectory mock_trajectory(const Trajectory& ground_truth,
                           std::span<const double> frame_timestamps,
                           const MockNoise& noise) {
  if (ground_truth.empty()) {
    throw MockError(MockErrorKind::kMissingGroundTruth,
                    "mock method needs a non-empty ground truth");
  }
  require_non_negative("sigma_pos", noise.sigma_pos);
  require_non_negative("sigma_rot", noise.sigma_rot);
  require_non_negative("drift_per_frame", noise.drift_per_frame);
  if (!(noise.scale > 0.0) || noise.keyframe_stride == 0) {
    throw MockError(MockErrorKind::kBadArguments,
                    "scale must be positive and keyframe_stride at least 1");
  }

  const std::vector<double> stamps = ground_truth.timestamps();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto gauss3 = [&](double sigma) {
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) v[k] = sigma * unit(rng);
    return v;
  };

  Trajectory out;
  Eigen::Vector3d drift = Eigen::Vector3d::Zero();
  std::size_t limit = frame_timestamps.size();
  if (noise.fail_after_frame) limit = std::min(limit, *noise.fail_after_frame);
  for (std::size_t k = 0; k < limit; ++k) {
    const double t = frame_timestamps[k];
    const PoseSE3& gt = ground_truth[nearest_index(stamps, t)].pose;
    const Eigen::Vector3d pos_noise = gauss3(noise.sigma_pos);
    const Eigen::Vector3d rot_noise = gauss3(noise.sigma_rot);
    drift += gauss3(noise.drift_per_frame);
    if (k % noise.keyframe_stride != 0) continue;
    const Eigen::Vector3d p = noise.scale * (gt.translation() + pos_noise + drift);
    out.push_back({t, PoseSE3(p, gt.rotation() * axis_angle(rot_noise))});
  }
  return out;
}

std::filesystem::path run_mock_method(const MockInvocation& inv,
                                      const MockOverrides& overrides) {
  if (inv.exp_id.empty() || inv.exp_folder.empty() ||
      inv.sequence_path.empty()) {
    throw MockError(MockErrorKind::kBadArguments,
                    "--sequence_path, --exp_id and --exp_folder are required");
  }
  const SequenceLayout layout{inv.sequence_path};
  if (!std::filesystem::exists(layout.groundtruth_csv())) {
    throw MockError(MockErrorKind::kMissingGroundTruth,
                    fmt::format("no ground truth at {}",
                                layout.groundtruth_csv().string()));
  }
  const Trajectory gt = load_trajectory(layout.groundtruth_csv().string());

  ParameterMap settings;
  if (!inv.settings_yaml.empty()) {
    settings = parse_settings(read_file(inv.settings_yaml));
  }
  MockNoise noise = mock_noise_from(settings);
  if (overrides.sigma_pos) noise.sigma_pos = *overrides.sigma_pos;
  if (overrides.sigma_rot) noise.sigma_rot = *overrides.sigma_rot;
  if (overrides.scale) noise.scale = *overrides.scale;
  if (overrides.drift_per_frame) noise.drift_per_frame = *overrides.drift_per_frame;
  if (overrides.keyframe_stride) noise.keyframe_stride = *overrides.keyframe_stride;
  if (overrides.fail_after_frame) noise.fail_after_frame = *overrides.fail_after_frame;
  if (overrides.seed) noise.seed = *overrides.seed;

  const auto rgb_csv = inv.rgb_csv.empty() ? layout.rgb_csv() : inv.rgb_csv;
  std::vector<double> frames;
  for (const auto& row : load_rgb_csv(rgb_csv)) frames.push_back(row.timestamp);

  const Trajectory traj = mock_trajectory(gt, frames, noise);
  std::filesystem::create_directories(inv.exp_folder);
  const auto out = inv.exp_folder / (inv.exp_id + ".txt");
  write_file_atomic(out, serialize_trajectory(traj));
  return out;
}

}  // namespace trajbench
