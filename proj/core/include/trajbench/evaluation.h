#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trajbench/error.h"
#include "trajbench/trajectory.h"

namespace trajbench {

enum class EvaluationErrorKind {
  kInsufficientCorrespondences,
  kZeroVariance,
  kSizeMismatch,
  kInvalidArgument,
};

using EvaluationError =
    KindedError<EvaluationErrorKind, ErrorCategory::kEvaluation>;

inline constexpr double kDefaultMaxTimeDifference = 0.02;  // seconds

// Injective index pairing between estimate and ground-truth stamps.
struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (est, gt)
  double max_difference = kDefaultMaxTimeDifference;
};

// Globally greedy matching: every candidate (i, j) with
// |est[i] + time_offset - gt[j]| <= max_difference is ranked by that
// difference (ties: smaller i, then smaller j) and accepted when both
// indices are still free. Pairs come back sorted by est index.
Association associate(std::span<const double> est_stamps,
                      std::span<const double> gt_stamps,
                      double max_difference = kDefaultMaxTimeDifference,
                      double time_offset = 0.0);

struct UmeyamaResult {
  Sim3Transform transform;
  Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();
  // Second singular value of the cross-covariance below 1e-9 x the first.
  bool degenerate = false;
};

// Closed-form least-squares (s, R, t) minimizing
// sum_i |dst_i - (s R src_i + t)|^2. With with_scale == false, s = 1.
UmeyamaResult umeyama_align(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst,
                            bool with_scale);

enum class AlignMode { kSim3, kSe3, kNone };

std::string_view to_string(AlignMode mode);
std::optional<AlignMode> parse_align_mode(std::string_view name);

struct ErrorStatistics {
  double rmse = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

ErrorStatistics compute_error_statistics(std::span<const double> errors);

struct AteResult {
  ErrorStatistics stats;
  std::vector<double> per_pair_errors;  // meters
  std::size_t num_pairs = 0;
  std::size_t num_estimated_frames = 0;
  std::size_t num_gt_frames = 0;
  std::size_t num_total_frames = 0;
  Sim3Transform alignment;
  bool degenerate_alignment = false;

  double rmse() const { return stats.rmse; }
};

struct AteOptions {
  AlignMode align_mode = AlignMode::kSim3;
  double max_difference = kDefaultMaxTimeDifference;
  double time_offset = 0.0;
};

// Associates, aligns matched estimate positions onto the matched ground
// truth, and measures |gt_i - T(est_i)| over every matched pair.
AteResult compute_ate(const Trajectory& estimate,
                      const Trajectory& ground_truth,
                      const AteOptions& options,
                      std::size_t num_total_frames);

}  // namespace trajbench
