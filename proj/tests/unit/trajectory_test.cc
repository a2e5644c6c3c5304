#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "testing/oracles.h"
#include "testing/temp_dir.h"
#include "trajbench/trajectory.h"

namespace trajbench {
namespace {

using testing::Rng;

TrajectoryErrorKind parse_error_kind(std::string_view text, std::size_t* line = nullptr) {
  try {
    parse_trajectory(text);
  } catch (const TrajectoryError& e) {
    if (line) *line = e.line();
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return TrajectoryErrorKind::kInvalidPose;
}

TEST(ParseTrajectory, SingleRecordColumnOrder) {
  const Trajectory t = parse_trajectory("0.0 1.0 2.0 3.0 0.0 0.0 0.0 1.0");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].timestamp, 0.0);
  EXPECT_EQ(t[0].pose.translation(), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(t[0].pose.rotation().w, 1.0);
  EXPECT_EQ(t[0].pose.rotation().x, 0.0);
}

TEST(ParseTrajectory, CommentsAndBlankLinesOnly) {
  EXPECT_TRUE(parse_trajectory("# comment\n\n").empty());
}

TEST(ParseTrajectory, DuplicateTimestampRejectedAtLineTwo) {
  std::size_t line = 0;
  EXPECT_EQ(parse_error_kind("0.0 1 2 3 0 0 0 1\n0.0 1 2 3 0 0 0 1", &line),
            TrajectoryErrorKind::kNonMonotonicTimestamp);
  EXPECT_EQ(line, 2u);
}

TEST(ParseTrajectory, DecreasingTimestampRejected) {
  EXPECT_EQ(parse_error_kind("1 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1"),
            TrajectoryErrorKind::kNonMonotonicTimestamp);
}

TEST(ParseTrajectory, Errors) {
  std::size_t line = 0;
  EXPECT_EQ(parse_error_kind("# c\n0 1 2 3 0 0 1", &line),
            TrajectoryErrorKind::kWrongFieldCount);
  EXPECT_EQ(line, 2u);
  EXPECT_EQ(parse_error_kind("0 1 2 3 0 0 0 1 9"),
            TrajectoryErrorKind::kWrongFieldCount);
  EXPECT_EQ(parse_error_kind("0 nan 2 3 0 0 0 1"), TrajectoryErrorKind::kNonFinite);
  EXPECT_EQ(parse_error_kind("0 1 inf 3 0 0 0 1"), TrajectoryErrorKind::kNonFinite);
  EXPECT_EQ(parse_error_kind("0 1 2 3 0 0 0 1e-7"),
            TrajectoryErrorKind::kDegenerateQuaternion);
  EXPECT_EQ(parse_error_kind("0 1 2 3 0 0 0 1\n1,1,2,3,0,0,0,1"),
            TrajectoryErrorKind::kMixedSeparators);
  EXPECT_EQ(parse_error_kind("-1 0 0 0 0 0 0 1"), TrajectoryErrorKind::kNonFinite);
}

TEST(ParseTrajectory, CommaSeparatedWithHeader) {
  const Trajectory t =
      parse_trajectory("ts,tx,ty,tz,qx,qy,qz,qw\n0.5,1,2,3,0,0,0,1\n0.6,1,2,3,0,0,0,1\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].timestamp, 0.6);
}

TEST(ParseTrajectory, ExponentAndTabs) {
  const Trajectory t = parse_trajectory("1e-3\t1.5E+1  2 3 0 0 0 1\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0].timestamp, 1e-3);
  EXPECT_DOUBLE_EQ(t[0].pose.translation().x(), 15.0);
}

TEST(ParseTrajectory, RenormalizesRoundedQuaternion) {
  const Trajectory t = parse_trajectory("0 0 0 0 0 0 0.7071 0.7071");
  const Quaternion& q = t[0].pose.rotation();
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
  EXPECT_NEAR(q.z, std::sqrt(0.5), 1e-12);
  const Trajectory big = parse_trajectory("0 0 0 0 0 0 0 2");
  EXPECT_NEAR(big[0].pose.rotation().w, 1.0, 1e-15);
}

TEST(SerializeTrajectory, Empty) { EXPECT_EQ(serialize_trajectory({}), ""); }

TEST(SerializeTrajectory, IdentityPose) {
  Trajectory t;
  t.push_back({0.0, PoseSE3()});
  EXPECT_EQ(serialize_trajectory(t),
            "0.000000000 0.000000000 0.000000000 0.000000000 0.000000000 "
            "0.000000000 0.000000000 1.000000000\n");
  EXPECT_EQ(serialize_trajectory(t, Separator::kComma),
            "0.000000000,0.000000000,0.000000000,0.000000000,0.000000000,"
            "0.000000000,0.000000000,1.000000000\n");
}

void expect_fieldwise_near(const Trajectory& a, const Trajectory& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].timestamp, b[i].timestamp, tol);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(a[i].pose.translation()[k], b[i].pose.translation()[k], tol);
    }
    EXPECT_NEAR(a[i].pose.rotation().x, b[i].pose.rotation().x, tol);
    EXPECT_NEAR(a[i].pose.rotation().y, b[i].pose.rotation().y, tol);
    EXPECT_NEAR(a[i].pose.rotation().z, b[i].pose.rotation().z, tol);
    EXPECT_NEAR(a[i].pose.rotation().w, b[i].pose.rotation().w, tol);
  }
}

TEST(SerializeTrajectory, RandomRoundTrip) {
  Rng rng(7);
  for (const auto sep : {Separator::kSpace, Separator::kComma}) {
    const Trajectory t = testing::random_trajectory(rng, 100);
    expect_fieldwise_near(parse_trajectory(serialize_trajectory(t, sep)), t, 1e-9);
  }
}

TEST(SerializeTrajectory, FileRoundTripWithHeader) {
  testing::TempDir dir;
  Rng rng(3);
  const Trajectory t = testing::random_trajectory(rng, 20);
  const auto path = (dir / "gt.csv").string();
  save_trajectory(path, t, Separator::kComma, "ts,tx,ty,tz,qx,qy,qz,qw");
  expect_fieldwise_near(load_trajectory(path), t, 1e-9);
}

TEST(Quaternion, IdentityAndQuarterTurn) {
  EXPECT_TRUE(quaternion_to_matrix({0, 0, 0, 1}).isApprox(Eigen::Matrix3d::Identity(), 0));
  const double h = std::sqrt(2.0) / 2.0;
  const Eigen::Vector3d v = quaternion_to_matrix({0, 0, h, h}) * Eigen::Vector3d(1, 0, 0);
  EXPECT_NEAR(v.x(), 0.0, 1e-15);
  EXPECT_NEAR(v.y(), 1.0, 1e-15);
  EXPECT_NEAR(v.z(), 0.0, 1e-15);
}

TEST(Quaternion, RandomMatricesAreRotationsAndSignInvariant) {
  Rng rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Quaternion q{g(rng), g(rng), g(rng), g(rng)};
    const double n = q.norm();
    q = {q.x / n, q.y / n, q.z / n, q.w / n};
    const Eigen::Matrix3d R = quaternion_to_matrix(q);
    EXPECT_LT((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
    EXPECT_LT((quaternion_to_matrix(-q) - R).cwiseAbs().maxCoeff(), 1e-15);
    // Matches v + 2w(u x v) + 2u x (u x v).
    const Eigen::Vector3d v = testing::random_vector(rng, 1.0);
    EXPECT_LT((R * v - testing::rotate_by_quaternion(q, v)).norm(), 1e-12);
    // Matrix -> quaternion recovers q up to sign.
    const Quaternion back = matrix_to_quaternion(R);
    EXPECT_GE(back.w, 0.0);
    const double dot = back.x * q.x + back.y * q.y + back.z * q.z + back.w * q.w;
    EXPECT_NEAR(std::abs(dot), 1.0, 1e-12);
  }
}

TEST(Quaternion, ProductComposesRotations) {
  Rng rng(5);
  const Quaternion a = matrix_to_quaternion(testing::random_rotation(rng));
  const Quaternion b = matrix_to_quaternion(testing::random_rotation(rng));
  EXPECT_LT((quaternion_to_matrix(a * b) -
             quaternion_to_matrix(a) * quaternion_to_matrix(b)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Sim3, RejectsInvalidParameters) {
  EXPECT_THROW(Sim3Transform(0.0, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()),
               TrajectoryError);
  EXPECT_THROW(Sim3Transform(-1.0, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()),
               TrajectoryError);
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(Sim3Transform(1.0, reflect, Eigen::Vector3d::Zero()), TrajectoryError);
  EXPECT_THROW(Sim3Transform(1.0, 1.01 * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()),
               TrajectoryError);
}

TEST(ApplySim3, IdentityLeavesInputUnchanged) {
  Rng rng(1);
  const Trajectory t = testing::random_trajectory(rng, 30);
  const Trajectory out = apply_sim3(Sim3Transform::identity(), t);
  expect_fieldwise_near(out, t, 1e-15);
}

TEST(ApplySim3, ScaleOnly) {
  Trajectory t;
  t.push_back({0.0, PoseSE3({1, 1, 1}, {})});
  const Trajectory out =
      apply_sim3(Sim3Transform(2.0, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()), t);
  EXPECT_EQ(out[0].pose.translation(), Eigen::Vector3d(2, 2, 2));
}

Sim3Transform random_sim3(Rng& rng) {
  std::uniform_real_distribution<double> s(0.1, 10.0);
  return {s(rng), testing::random_rotation(rng), testing::random_vector(rng, 10.0)};
}

TEST(ApplySim3, CompositionMatchesSequentialApplication) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory x = testing::random_trajectory(rng, 50);
    const Sim3Transform t1 = random_sim3(rng), t2 = random_sim3(rng);
    const Trajectory seq = apply_sim3(t2, apply_sim3(t1, x));
    const Trajectory comp = apply_sim3(t2.compose(t1), x);
    ASSERT_EQ(seq.size(), comp.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      EXPECT_EQ(seq[i].timestamp, x[i].timestamp);
      EXPECT_LT((seq[i].pose.translation() - comp[i].pose.translation()).norm(),
                1e-9 * std::max(1.0, seq[i].pose.translation().norm()));
      const auto& a = seq[i].pose.rotation();
      const auto& b = comp[i].pose.rotation();
      EXPECT_NEAR(std::abs(a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w), 1.0, 1e-9);
    }
  }
}

TEST(ApplySim3, RigidPreservesDistancesAndStamps) {
  Rng rng(2);
  const Trajectory x = testing::random_trajectory(rng, 40);
  const Sim3Transform T(1.0, testing::random_rotation(rng), testing::random_vector(rng, 5));
  const Trajectory y = apply_sim3(T, x);
  EXPECT_EQ(y.timestamps(), x.timestamps());
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double dx = (x[i].pose.translation() - x[0].pose.translation()).norm();
    const double dy = (y[i].pose.translation() - y[0].pose.translation()).norm();
    EXPECT_NEAR(dx, dy, 1e-9);
  }
  // Orientation is left-multiplied by the rotation.
  const Eigen::Matrix3d expected = T.rotation() * quaternion_to_matrix(x[3].pose.rotation());
  EXPECT_LT((quaternion_to_matrix(y[3].pose.rotation()) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Trajectory, PushBackEnforcesOrdering) {
  Trajectory t;
  t.push_back({1.0, PoseSE3()});
  EXPECT_THROW(t.push_back({1.0, PoseSE3()}), TrajectoryError);
  EXPECT_THROW(t.push_back({0.5, PoseSE3()}), TrajectoryError);
  EXPECT_THROW(t.push_back({std::numeric_limits<double>::infinity(), PoseSE3()}),
               TrajectoryError);
}

}  // namespace
}  // namespace trajbench
