#include "trajbench/svd3.h"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>

namespace trajbench {

namespace {

constexpr double kOffDiagonalTolerance = 1e-14;
constexpr int kMaxSweeps = 64;

// Picks a unit vector orthogonal to the given unit vector.
Eigen::Vector3d any_orthogonal(const Eigen::Vector3d& n) {
  const Eigen::Vector3d axis = std::abs(n.x()) <= std::abs(n.y()) &&
                                       std::abs(n.x()) <= std::abs(n.z())
                                   ? Eigen::Vector3d::UnitX()
                               : std::abs(n.y()) <= std::abs(n.z())
                                   ? Eigen::Vector3d::UnitY()
                                   : Eigen::Vector3d::UnitZ();
  return n.cross(axis).normalized();
}

}  // namespace

Svd3 jacobi_svd(const Eigen::Matrix3d& a) {
  Eigen::Matrix3d w = a;
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (const auto& [p, q] : kPairs) {
      const double alpha = w.col(p).squaredNorm();
      const double beta = w.col(q).squaredNorm();
      const double gamma = w.col(p).dot(w.col(q));
      if (gamma == 0.0 ||
          std::abs(gamma) <= kOffDiagonalTolerance * std::sqrt(alpha * beta)) {
        continue;
      }
      rotated = true;
      const double zeta = (beta - alpha) / (2.0 * gamma);
      const double t = std::copysign(1.0, zeta) /
                       (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = c * t;
      for (int r = 0; r < 3; ++r) {
        const double wp = w(r, p), wq = w(r, q);
        w(r, p) = c * wp - s * wq;
        w(r, q) = s * wp + c * wq;
        const double vp = v(r, p), vq = v(r, q);
        v(r, p) = c * vp - s * vq;
        v(r, q) = s * vp + c * vq;
      }
    }
    if (!rotated) break;
  }

  std::array<double, 3> sigma{};
  for (int k = 0; k < 3; ++k) sigma[k] = w.col(k).norm();
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return sigma[i] > sigma[j]; });

  Svd3 out;
  out.sweeps = sweep;
  for (int k = 0; k < 3; ++k) {
    out.singular_values(k) = sigma[order[k]];
    out.v.col(k) = v.col(order[k]);
    out.u.col(k) = w.col(order[k]);
  }

  // Columns of w for vanishing singular values carry no direction; complete
  // u to an orthonormal basis instead.
  const double scale = out.singular_values(0);
  const double tiny = scale > 0.0 ? scale * 1e-15 : 0.0;
  if (scale == 0.0) {
    out.u = Eigen::Matrix3d::Identity();
    return out;
  }
  const Eigen::Vector3d w1 = out.u.col(1);
  const Eigen::Vector3d w2 = out.u.col(2);
  out.u.col(0) /= out.singular_values(0);
  if (out.singular_values(1) > tiny) {
    const Eigen::Vector3d u0 = out.u.col(0);
    out.u.col(1) = (w1 - u0.dot(w1) * u0).normalized();
  } else {
    out.u.col(1) = any_orthogonal(out.u.col(0));
  }
  // The cross product keeps u exactly orthonormal even when the third
  // column of w is short and noisy.
  Eigen::Vector3d u2 = out.u.col(0).cross(out.u.col(1)).normalized();
  if (out.singular_values(2) > tiny && u2.dot(w2) < 0.0) u2 = -u2;
  out.u.col(2) = u2;
  return out;
}

}  // namespace trajbench
