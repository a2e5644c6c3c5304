#include "trajbench/trajectory.h"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trajbench {

namespace {

constexpr double kMinQuaternionNorm = 1e-6;
constexpr double kUnitNormTolerance = 1e-9;
constexpr double kOrthonormalTolerance = 1e-9;

bool all_finite(const Eigen::Vector3d& v) { return v.allFinite(); }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line,
                                           Separator separator) {
  std::vector<std::string_view> fields;
  if (separator == Separator::kComma) {
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      fields.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string line_message(std::size_t line, std::string_view what) {
  return fmt::format("line {}: {}", line, what);
}

}  // namespace

TrajectoryError::TrajectoryError(TrajectoryErrorKind kind, std::size_t line,
                                 const std::string& message)
    : KindedError(kind, message), line_(line) {}

double Quaternion::norm() const {
  return std::sqrt(x * x + y * y + z * z + w * w);
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
  };
}

PoseSE3::PoseSE3(const Eigen::Vector3d& translation,
                 const Quaternion& rotation)
    : translation_(translation), rotation_(rotation) {
  const double n = rotation.norm();
  if (!all_finite(translation) || !std::isfinite(n)) {
    throw TrajectoryError(TrajectoryErrorKind::kInvalidPose, 0,
                          "pose has non-finite components");
  }
  if (n < kMinQuaternionNorm) {
    throw TrajectoryError(
        TrajectoryErrorKind::kDegenerateQuaternion, 0,
        fmt::format("quaternion norm {} below {}", n, kMinQuaternionNorm));
  }
  if (std::abs(n - 1.0) > kUnitNormTolerance) {
    rotation_ = {rotation.x / n, rotation.y / n, rotation.z / n,
                 rotation.w / n};
  }
}

Trajectory::Trajectory(std::vector<TrajectoryEntry> entries) {
  entries_.reserve(entries.size());
  for (auto& e : entries) push_back(std::move(e));
}

void Trajectory::push_back(TrajectoryEntry entry) {
  if (!std::isfinite(entry.timestamp) || entry.timestamp < 0.0) {
    throw TrajectoryError(
        TrajectoryErrorKind::kNonFinite, 0,
        fmt::format("timestamp {} is not finite and >= 0", entry.timestamp));
  }
  if (!entries_.empty() && !(entry.timestamp > entries_.back().timestamp)) {
    throw TrajectoryError(
        TrajectoryErrorKind::kNonMonotonicTimestamp, 0,
        fmt::format("timestamp {} does not follow {}", entry.timestamp,
                    entries_.back().timestamp));
  }
  entries_.push_back(std::move(entry));
}

std::vector<double> Trajectory::timestamps() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.timestamp);
  return out;
}

std::vector<Eigen::Vector3d> Trajectory::positions() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.pose.translation());
  return out;
}

Sim3Transform::Sim3Transform(double scale, const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation)
    : scale_(scale), rotation_(rotation), translation_(translation) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !rotation.allFinite() ||
      !translation.allFinite()) {
    throw TrajectoryError(TrajectoryErrorKind::kInvalidTransform, 0,
                          "similarity needs finite components and scale > 0");
  }
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  const double det = rotation.determinant();
  if (ortho > kOrthonormalTolerance ||
      std::abs(det - 1.0) > kOrthonormalTolerance) {
    throw TrajectoryError(
        TrajectoryErrorKind::kInvalidTransform, 0,
        fmt::format("rotation not proper orthonormal (|RtR-I|={}, det={})",
                    ortho, det));
  }
}

Sim3Transform Sim3Transform::compose(const Sim3Transform& other) const {
  Sim3Transform out;
  out.scale_ = scale_ * other.scale_;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = scale_ * (rotation_ * other.translation_) + translation_;
  return out;
}

Trajectory parse_trajectory(std::istream& in) {
  Trajectory trajectory;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_record_or_header = false;
  bool have_separator = false;
  Separator file_separator = Separator::kSpace;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const Separator sep = line.find(',') != std::string_view::npos
                              ? Separator::kComma
                              : Separator::kSpace;
    if (have_separator && sep != file_separator) {
      throw TrajectoryError(
          TrajectoryErrorKind::kMixedSeparators, line_no,
          line_message(line_no, "separator differs from earlier lines"));
    }
    have_separator = true;
    file_separator = sep;

    const auto fields = split_fields(line, sep);
    double first = 0.0;
    if (!seen_record_or_header && !parse_double(fields.front(), first)) {
      // Column header such as "ts,tx,ty,tz,qx,qy,qz,qw".
      seen_record_or_header = true;
      continue;
    }
    seen_record_or_header = true;

    if (fields.size() != 8) {
      throw TrajectoryError(
          TrajectoryErrorKind::kWrongFieldCount, line_no,
          line_message(line_no,
                       fmt::format("expected 8 fields, got {}", fields.size())));
    }
    double v[8];
    for (int k = 0; k < 8; ++k) {
      if (!parse_double(fields[k], v[k]) || !std::isfinite(v[k])) {
        throw TrajectoryError(
            TrajectoryErrorKind::kNonFinite, line_no,
            line_message(line_no, fmt::format("field {} ('{}') is not a "
                                              "finite number",
                                              k + 1, fields[k])));
      }
    }
    const Quaternion q{v[4], v[5], v[6], v[7]};
    const double qn = q.norm();
    if (qn < kMinQuaternionNorm) {
      throw TrajectoryError(
          TrajectoryErrorKind::kDegenerateQuaternion, line_no,
          line_message(line_no, fmt::format("quaternion norm {}", qn)));
    }
    if (v[0] < 0.0) {
      throw TrajectoryError(TrajectoryErrorKind::kNonFinite, line_no,
                            line_message(line_no, "negative timestamp"));
    }
    if (!trajectory.empty() && !(v[0] > trajectory.entries().back().timestamp)) {
      throw TrajectoryError(
          TrajectoryErrorKind::kNonMonotonicTimestamp, line_no,
          line_message(line_no, fmt::format("timestamp {} does not follow {}",
                                            v[0],
                                            trajectory.entries().back().timestamp)));
    }
    trajectory.push_back({v[0], PoseSE3(Eigen::Vector3d(v[1], v[2], v[3]), q)});
  }
  return trajectory;
}

Trajectory parse_trajectory(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trajectory(in);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::kData,
                fmt::format("cannot open trajectory file '{}'", path));
  }
  try {
    return parse_trajectory(in);
  } catch (const TrajectoryError& e) {
    throw TrajectoryError(e.kind(), e.line(),
                          fmt::format("{}: {}", path, e.what()));
  }
}

std::string serialize_trajectory(const Trajectory& trajectory,
                                 Separator separator) {
  const char sep = separator == Separator::kComma ? ',' : ' ';
  std::string out;
  out.reserve(trajectory.size() * 112);
  for (const auto& e : trajectory) {
    const auto& t = e.pose.translation();
    const auto& q = e.pose.rotation();
    fmt::format_to(std::back_inserter(out),
                   "{:.9f}{}{:.9f}{}{:.9f}{}{:.9f}{}{:.9f}{}{:.9f}{}{:.9f}{}"
                   "{:.9f}\n",
                   e.timestamp, sep, t.x(), sep, t.y(), sep, t.z(), sep, q.x,
                   sep, q.y, sep, q.z, sep, q.w);
  }
  return out;
}

void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     Separator separator, std::string_view header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::kData,
                fmt::format("cannot write trajectory file '{}'", path));
  }
  if (!header.empty()) out << header << '\n';
  out << serialize_trajectory(trajectory, separator);
}

Eigen::Matrix3d quaternion_to_matrix(const Quaternion& q) {
  // s = 2/|q|^2 keeps the result orthonormal for slightly off-unit input.
  const double n2 = q.x * q.x + q.y * q.y + q.z * q.z + q.w * q.w;
  const double s = 2.0 / n2;
  const double xx = q.x * q.x, yy = q.y * q.y, zz = q.z * q.z;
  const double xy = q.x * q.y, xz = q.x * q.z, yz = q.y * q.z;
  const double wx = q.w * q.x, wy = q.w * q.y, wz = q.w * q.z;
  Eigen::Matrix3d r;
  r << 1.0 - s * (yy + zz), s * (xy - wz), s * (xz + wy),  //
      s * (xy + wz), 1.0 - s * (xx + zz), s * (yz - wx),   //
      s * (xz - wy), s * (yz + wx), 1.0 - s * (xx + yy);
  return r;
}

Quaternion matrix_to_quaternion(const Eigen::Matrix3d& m) {
  Quaternion q;
  const double trace = m.trace();
  if (trace > m(0, 0) && trace > m(1, 1) && trace > m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + trace);
    q.w = 0.25 * s;
    q.x = (m(2, 1) - m(1, 2)) / s;
    q.y = (m(0, 2) - m(2, 0)) / s;
    q.z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    q.w = (m(2, 1) - m(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (m(0, 1) + m(1, 0)) / s;
    q.z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) >= m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    q.w = (m(0, 2) - m(2, 0)) / s;
    q.x = (m(0, 1) + m(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
    q.w = (m(1, 0) - m(0, 1)) / s;
    q.x = (m(0, 2) + m(2, 0)) / s;
    q.y = (m(1, 2) + m(2, 1)) / s;
    q.z = 0.25 * s;
  }
  if (q.w < 0.0) q = -q;
  const double n = q.norm();
  return {q.x / n, q.y / n, q.z / n, q.w / n};
}

Trajectory apply_sim3(const Sim3Transform& transform,
                      const Trajectory& trajectory) {
  const Quaternion rq = matrix_to_quaternion(transform.rotation());
  std::vector<TrajectoryEntry> out;
  out.reserve(trajectory.size());
  for (const auto& e : trajectory) {
    Quaternion q = rq * e.pose.rotation();
    const double n = q.norm();
    q = {q.x / n, q.y / n, q.z / n, q.w / n};
    out.push_back({e.timestamp,
                   PoseSE3(transform.apply(e.pose.translation()), q)});
  }
  return Trajectory(std::move(out));
}

}  // namespace trajbench
