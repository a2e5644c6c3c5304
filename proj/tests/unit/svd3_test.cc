#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "testing/oracles.h"
#include "trajbench/svd3.h"

namespace trajbench {
namespace {

void expect_valid(const Eigen::Matrix3d& a, const Svd3& s, double tol) {
  const Eigen::Matrix3d rec = s.u * s.singular_values.asDiagonal() * s.v.transpose();
  EXPECT_LT((rec - a).cwiseAbs().maxCoeff(), tol * std::max(1.0, a.norm()));
  EXPECT_LT((s.u.transpose() * s.u - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((s.v.transpose() * s.v - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(s.singular_values[0], s.singular_values[1]);
  EXPECT_GE(s.singular_values[1], s.singular_values[2]);
  EXPECT_GE(s.singular_values[2], 0.0);
}

TEST(JacobiSvd, RandomMatricesMatchEigen) {
  testing::Rng rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = g(rng);
    const Svd3 s = jacobi_svd(a);
    expect_valid(a, s, 1e-12);
    const Eigen::JacobiSVD<Eigen::Matrix3d> ref(a);
    EXPECT_LT((s.singular_values - ref.singularValues()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(JacobiSvd, RankDeficientInputs) {
  testing::Rng rng(4);
  const Eigen::Vector3d x = testing::random_vector(rng, 1), y = testing::random_vector(rng, 1);
  const Eigen::Vector3d z = testing::random_vector(rng, 1);
  const Eigen::Matrix3d rank1 = x * y.transpose();
  const Eigen::Matrix3d rank2 = rank1 + z * x.transpose();
  for (const Eigen::Matrix3d& a : {rank1, rank2, Eigen::Matrix3d::Zero().eval(),
                                   Eigen::Matrix3d::Identity().eval()}) {
    expect_valid(a, jacobi_svd(a), 1e-12);
  }
  EXPECT_LT(jacobi_svd(rank1).singular_values[1], 1e-12);
  EXPECT_LT(jacobi_svd(rank2).singular_values[2], 1e-12);
}

TEST(JacobiSvd, BitwiseDeterministic) {
  testing::Rng rng(8);
  const Eigen::Matrix3d a = testing::random_rotation(rng) * 3.0;
  const Svd3 s1 = jacobi_svd(a), s2 = jacobi_svd(a);
  EXPECT_EQ(s1.u, s2.u);
  EXPECT_EQ(s1.v, s2.v);
  EXPECT_EQ(s1.singular_values, s2.singular_values);
  EXPECT_EQ(s1.sweeps, s2.sweeps);
}

}  // namespace
}  // namespace trajbench
