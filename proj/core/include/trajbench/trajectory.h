#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "trajbench/error.h"

namespace trajbench {

enum class TrajectoryErrorKind {
  kWrongFieldCount,
  kNonFinite,
  kDegenerateQuaternion,
  kNonMonotonicTimestamp,
  kMixedSeparators,
  kInvalidPose,
  kInvalidTransform,
};

class TrajectoryError
    : public KindedError<TrajectoryErrorKind, ErrorCategory::kData> {
 public:
  // line is 1-based; 0 when the error is not tied to a line.
  TrajectoryError(TrajectoryErrorKind kind, std::size_t line,
                  const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Unit quaternion stored in file column order (x, y, z, w).
struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  double norm() const;
  Quaternion operator-() const { return {-x, -y, -z, -w}; }
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);

// Rigid-body pose: translation in meters, rotation as a unit quaternion.
class PoseSE3 {
 public:
  PoseSE3() = default;

  // Throws TrajectoryError(kDegenerateQuaternion) when |q| < 1e-6 and
  // kInvalidPose for non-finite components. Quaternions farther than 1e-9
  // from unit norm are renormalized.
  PoseSE3(const Eigen::Vector3d& translation, const Quaternion& rotation);

  const Eigen::Vector3d& translation() const { return translation_; }
  const Quaternion& rotation() const { return rotation_; }

 private:
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
  Quaternion rotation_;
};

struct TrajectoryEntry {
  double timestamp = 0.0;  // seconds
  PoseSE3 pose;
};

// Timestamped poses with strictly increasing, finite, non-negative stamps.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectoryEntry> entries);

  // Throws TrajectoryError(kNonMonotonicTimestamp) if the stamp does not
  // strictly follow the last one.
  void push_back(TrajectoryEntry entry);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const TrajectoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<TrajectoryEntry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<double> timestamps() const;
  std::vector<Eigen::Vector3d> positions() const;

 private:
  std::vector<TrajectoryEntry> entries_;
};

// x -> scale * rotation * x + translation.
class Sim3Transform {
 public:
  Sim3Transform() = default;
  // Throws TrajectoryError(kInvalidTransform) unless scale > 0 and rotation
  // is proper orthonormal within 1e-9.
  Sim3Transform(double scale, const Eigen::Matrix3d& rotation,
                const Eigen::Vector3d& translation);

  static Sim3Transform identity() { return {}; }

  double scale() const { return scale_; }
  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale_ * (rotation_ * p) + translation_;
  }

  // (this ∘ other)(x) == this->apply(other.apply(x)).
  Sim3Transform compose(const Sim3Transform& other) const;

 private:
  double scale_ = 1.0;
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

enum class Separator { kSpace, kComma };

// Reads "t tx ty tz qx qy qz qw" records. '#' lines and blank lines are
// skipped; a single non-numeric header row (e.g. "ts,tx,...") is accepted
// before the first record. Each line's separator is detected independently
// but the whole file must use one kind.
Trajectory parse_trajectory(std::istream& in);
Trajectory parse_trajectory(std::string_view text);
Trajectory load_trajectory(const std::string& path);

// Nine fractional digits per field, one line per entry, no header.
std::string serialize_trajectory(const Trajectory& trajectory,
                                 Separator separator = Separator::kSpace);
void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     Separator separator = Separator::kSpace,
                     std::string_view header = {});

Eigen::Matrix3d quaternion_to_matrix(const Quaternion& q);
// Shepperd's method; result has w >= 0.
Quaternion matrix_to_quaternion(const Eigen::Matrix3d& rotation);

Trajectory apply_sim3(const Sim3Transform& transform,
                      const Trajectory& trajectory);

}  // namespace trajbench
