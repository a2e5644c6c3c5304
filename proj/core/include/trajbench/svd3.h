#pragma once

#include <Eigen/Core>

namespace trajbench {

// a = u * diag(singular_values) * v^T with singular values sorted
// descending and non-negative; u and v orthonormal (either sign of det).
struct Svd3 {
  Eigen::Matrix3d u;
  Eigen::Vector3d singular_values;
  Eigen::Matrix3d v;
  int sweeps = 0;
};

// One-sided (Hestenes) cyclic Jacobi. Column pairs are rotated until every
// normalized inner product is below 1e-14; the sweep order is fixed, so the
// result is bitwise reproducible for a given input.
Svd3 jacobi_svd(const Eigen::Matrix3d& a);

}  // namespace trajbench
