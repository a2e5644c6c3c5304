#include "trajbench/evaluation.h"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "trajbench/svd3.h"

namespace trajbench {

namespace {

constexpr double kDegenerateRatio = 1e-9;
constexpr double kMinSourceVariance = 1e-18;

double interpolated_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Association associate(std::span<const double> est_stamps,
                      std::span<const double> gt_stamps,
                      double max_difference, double time_offset) {
  if (!(max_difference > 0.0)) {
    throw EvaluationError(EvaluationErrorKind::kInvalidArgument,
                          "max_difference must be positive");
  }
  struct Candidate {
    double diff;
    std::size_t est;
    std::size_t gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < est_stamps.size(); ++i) {
    const double t = est_stamps[i] + time_offset;
    auto it = std::lower_bound(gt_stamps.begin(), gt_stamps.end(),
                               t - max_difference);
    for (; it != gt_stamps.end() && *it <= t + max_difference; ++it) {
      const double diff = std::abs(t - *it);
      if (diff <= max_difference) {
        candidates.push_back(
            {diff, i, static_cast<std::size_t>(it - gt_stamps.begin())});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tie(a.diff, a.est, a.gt) <
                     std::tie(b.diff, b.est, b.gt);
            });

  std::vector<bool> est_used(est_stamps.size(), false);
  std::vector<bool> gt_used(gt_stamps.size(), false);
  Association out;
  out.max_difference = max_difference;
  for (const auto& c : candidates) {
    if (est_used[c.est] || gt_used[c.gt]) continue;
    est_used[c.est] = true;
    gt_used[c.gt] = true;
    out.pairs.emplace_back(c.est, c.gt);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

UmeyamaResult umeyama_align(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst,
                            bool with_scale) {
  if (src.size() != dst.size()) {
    throw EvaluationError(
        EvaluationErrorKind::kSizeMismatch,
        fmt::format("point sets differ in size ({} vs {})", src.size(),
                    dst.size()));
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw EvaluationError(
        EvaluationErrorKind::kInsufficientCorrespondences,
        fmt::format("alignment needs at least 3 correspondences, got {}", n));
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::Vector3d mu_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src *= inv_n;
  mu_dst *= inv_n;

  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d a = src[i] - mu_src;
    const Eigen::Vector3d b = dst[i] - mu_dst;
    sigma.noalias() += b * a.transpose();
    var_src += a.squaredNorm();
  }
  sigma *= inv_n;
  var_src *= inv_n;

  if (with_scale && var_src < kMinSourceVariance) {
    throw EvaluationError(
        EvaluationErrorKind::kZeroVariance,
        fmt::format("source variance {} too small for scale estimation",
                    var_src));
  }

  const Svd3 svd = jacobi_svd(sigma);
  Eigen::Vector3d s_diag(1.0, 1.0, 1.0);
  if ((svd.u * svd.v.transpose()).determinant() < 0.0) s_diag(2) = -1.0;

  const Eigen::Matrix3d rotation =
      svd.u * s_diag.asDiagonal() * svd.v.transpose();
  const double scale =
      with_scale ? svd.singular_values.dot(s_diag) / var_src : 1.0;
  const Eigen::Vector3d translation = mu_dst - scale * (rotation * mu_src);

  UmeyamaResult out;
  out.transform = Sim3Transform(scale, rotation, translation);
  out.singular_values = svd.singular_values;
  out.degenerate =
      svd.singular_values(1) < kDegenerateRatio * svd.singular_values(0);
  return out;
}

std::string_view to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::kSim3:
      return "sim3";
    case AlignMode::kSe3:
      return "se3";
    case AlignMode::kNone:
      return "none";
  }
  return "unknown";
}

std::optional<AlignMode> parse_align_mode(std::string_view name) {
  if (name == "sim3") return AlignMode::kSim3;
  if (name == "se3") return AlignMode::kSe3;
  if (name == "none") return AlignMode::kNone;
  return std::nullopt;
}

ErrorStatistics compute_error_statistics(std::span<const double> errors) {
  ErrorStatistics s;
  if (errors.empty()) return s;
  const double n = static_cast<double>(errors.size());
  double sum = 0.0, sum_sq = 0.0;
  for (const double e : errors) {
    sum += e;
    sum_sq += e * e;
  }
  s.mean = sum / n;
  s.rmse = std::sqrt(sum_sq / n);
  double var = 0.0;
  for (const double e : errors) var += (e - s.mean) * (e - s.mean);
  s.std = std::sqrt(var / n);
  const auto [lo, hi] = std::minmax_element(errors.begin(), errors.end());
  s.min = *lo;
  s.max = *hi;
  s.median = interpolated_median({errors.begin(), errors.end()});
  return s;
}

AteResult compute_ate(const Trajectory& estimate,
                      const Trajectory& ground_truth,
                      const AteOptions& options,
                      std::size_t num_total_frames) {
  const auto est_stamps = estimate.timestamps();
  const auto gt_stamps = ground_truth.timestamps();
  const Association assoc = associate(est_stamps, gt_stamps,
                                      options.max_difference,
                                      options.time_offset);

  const std::size_t n = assoc.pairs.size();
  if (n == 0 || (n < 3 && options.align_mode != AlignMode::kNone)) {
    throw EvaluationError(
        EvaluationErrorKind::kInsufficientCorrespondences,
        fmt::format("only {} matched pairs (estimate {} poses, ground truth "
                    "{} poses)",
                    n, estimate.size(), ground_truth.size()));
  }

  std::vector<Eigen::Vector3d> est_points, gt_points;
  est_points.reserve(n);
  gt_points.reserve(n);
  for (const auto& [i, j] : assoc.pairs) {
    est_points.push_back(estimate[i].pose.translation());
    gt_points.push_back(ground_truth[j].pose.translation());
  }

  AteResult result;
  if (options.align_mode != AlignMode::kNone) {
    const UmeyamaResult aligned = umeyama_align(
        est_points, gt_points, options.align_mode == AlignMode::kSim3);
    result.alignment = aligned.transform;
    result.degenerate_alignment = aligned.degenerate;
  }

  result.per_pair_errors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    result.per_pair_errors.push_back(
        (gt_points[k] - result.alignment.apply(est_points[k])).norm());
  }
  result.stats = compute_error_statistics(result.per_pair_errors);
  result.num_pairs = n;
  result.num_estimated_frames = estimate.size();
  result.num_gt_frames = ground_truth.size();
  result.num_total_frames = num_total_frames;
  return result;
}

}  // namespace trajbench
