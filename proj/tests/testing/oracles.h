#pragma once

// Reference computations used as test oracles. None of them calls the code
// under test.

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "trajbench/trajectory.h"

namespace trajbench::testing {

using Rng = std::mt19937_64;

// Uniform random rotation (normalized Gaussian quaternion).
Eigen::Matrix3d random_rotation(Rng& rng);
Eigen::Vector3d random_vector(Rng& rng, double half_width);
std::vector<Eigen::Vector3d> random_cloud(Rng& rng, std::size_t n,
                                          double half_width);
// Strictly increasing stamps, random poses.
Trajectory random_trajectory(Rng& rng, std::size_t n);

// Sum of squared residuals |dst_i - (s R src_i + t)|^2.
double alignment_residual(std::span<const Eigen::Vector3d> src,
                          std::span<const Eigen::Vector3d> dst, double s,
                          const Eigen::Matrix3d& R, const Eigen::Vector3d& t);

// Eigen's own Umeyama as an independent route to the same optimum.
struct ReferenceSim3 {
  double s = 1.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};
ReferenceSim3 reference_umeyama(std::span<const Eigen::Vector3d> src,
                                std::span<const Eigen::Vector3d> dst,
                                bool with_scale);

// Interpolated quantile written as a tent-weighted sum over ranks.
double tent_quantile(std::vector<double> values, double p);

struct ReferenceBox {
  double q1, median, q3, whisker_low, whisker_high;
  std::vector<double> outliers;  // ascending
};
ReferenceBox reference_boxplot(std::vector<double> values);

// Exhaustive matching for tiny inputs: maximum number of pairs, then
// minimum total |difference|. Returns pairs sorted by est index.
std::vector<std::pair<std::size_t, std::size_t>> brute_force_matching(
    std::span<const double> est, std::span<const double> gt,
    double max_difference);

// Quaternion rotation written out as v' = v + 2w(u x v) + 2u x (u x v).
Eigen::Vector3d rotate_by_quaternion(const Quaternion& q,
                                     const Eigen::Vector3d& v);

}  // namespace trajbench::testing
