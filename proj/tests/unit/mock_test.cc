#include <gtest/gtest.h>

#include "testing/oracles.h"
#include "testing/temp_dir.h"
#include "trajbench/adapter.h"
#include "trajbench/evaluation.h"
#include "trajbench/mock_method.h"

namespace trajbench {
namespace {

struct Fixture {
  testing::TempDir dir;
  SyntheticAdapter adapter{SyntheticOptions{.seed = 3, .num_frames = 120}};
  Trajectory gt = adapter.ground_truth("sequence_00");
  std::vector<double> stamps = gt.timestamps();
};

double ate(const Trajectory& est, const Trajectory& gt, AlignMode mode) {
  AteOptions o;
  o.align_mode = mode;
  return compute_ate(est, gt, o, gt.size()).rmse();
}

TEST(MockTrajectory, ZeroNoiseReproducesGroundTruth) {
  Fixture f;
  const Trajectory est = mock_trajectory(f.gt, f.stamps, MockNoise{});
  ASSERT_EQ(est.size(), f.gt.size());
  EXPECT_LT(ate(est, f.gt, AlignMode::kSim3), 1e-9);
  EXPECT_LT(ate(est, f.gt, AlignMode::kNone), 1e-12);
}

TEST(MockTrajectory, ScaleIsInvisibleOnlyUnderSim3) {
  Fixture f;
  MockNoise n;
  n.scale = 2.5;
  const Trajectory est = mock_trajectory(f.gt, f.stamps, n);
  EXPECT_LT(ate(est, f.gt, AlignMode::kSim3), 1e-9);
  EXPECT_GT(ate(est, f.gt, AlignMode::kSe3), 0.1);
}

TEST(MockTrajectory, KeyframeStride) {
  Fixture f;
  MockNoise n;
  n.keyframe_stride = 3;
  const Trajectory est = mock_trajectory(f.gt, f.stamps, n);
  EXPECT_EQ(est.size(), 40u);
  EXPECT_EQ(est[1].timestamp, f.stamps[3]);
}

TEST(MockTrajectory, FailAfterFrameTruncates) {
  Fixture f;
  MockNoise n;
  n.fail_after_frame = 10;
  EXPECT_EQ(mock_trajectory(f.gt, f.stamps, n).size(), 10u);
}

TEST(MockTrajectory, DeterministicPerSeed) {
  Fixture f;
  MockNoise n;
  n.sigma_pos = 0.05;
  n.sigma_rot = 0.01;
  n.drift_per_frame = 0.001;
  n.seed = 11;
  const Trajectory a = mock_trajectory(f.gt, f.stamps, n);
  const Trajectory b = mock_trajectory(f.gt, f.stamps, n);
  n.seed = 12;
  const Trajectory c = mock_trajectory(f.gt, f.stamps, n);
  EXPECT_EQ(serialize_trajectory(a), serialize_trajectory(b));
  EXPECT_NE(serialize_trajectory(a), serialize_trajectory(c));
}

TEST(MockTrajectory, NoiseLevelMatchesSigma) {
  Fixture f;
  SyntheticAdapter big{SyntheticOptions{.seed = 3, .num_frames = 2000}};
  const Trajectory gt = big.ground_truth("sequence_00");
  MockNoise n;
  n.sigma_pos = 0.02;
  n.seed = 5;
  const double e = ate(mock_trajectory(gt, gt.timestamps(), n), gt, AlignMode::kNone);
  EXPECT_NEAR(e, 0.02 * std::sqrt(3.0), 0.1 * 0.02 * std::sqrt(3.0));
}

TEST(MockNoiseFrom, SettingsKeysAndSeedPrecedence) {
  ParameterMap s{{"sigma_pos", "0.1"}, {"keyframe_stride", "2"}, {kHarnessSeedKey, "77"}};
  MockNoise n = mock_noise_from(s);
  EXPECT_EQ(n.sigma_pos, 0.1);
  EXPECT_EQ(n.keyframe_stride, 2u);
  EXPECT_EQ(n.seed, 77u);
  EXPECT_FALSE(n.fail_after_frame.has_value());
  s.set("seed", "5");
  s.set("fail_after_frame", "-1");
  n = mock_noise_from(s);
  EXPECT_EQ(n.seed, 5u);
  EXPECT_FALSE(n.fail_after_frame.has_value());
}

TEST(RunMockMethod, WritesTrajectoryAndHonorsOverrides) {
  Fixture f;
  SyntheticAdapter small{SyntheticOptions{.seed = 3, .num_frames = 30}};
  const SequenceLayout layout = prepare_sequence(small, "sequence_00", f.dir / "synthetic");
  MockInvocation inv;
  inv.sequence_path = layout.root;
  inv.calib_yaml = layout.calibration_yaml();
  inv.exp_id = "00007";
  inv.exp_folder = f.dir / "out";
  MockOverrides ov;
  ov.keyframe_stride = 2;
  const auto path = run_mock_method(inv, ov);
  EXPECT_EQ(path, f.dir / "out" / "00007.txt");
  EXPECT_EQ(load_trajectory(path.string()).size(), 15u);
}

TEST(RunMockMethod, MissingGroundTruth) {
  Fixture f;
  SyntheticAdapter small{SyntheticOptions{.seed = 3, .num_frames = 10}};
  const SequenceLayout layout = prepare_sequence(small, "sequence_00", f.dir / "synthetic");
  std::filesystem::remove(layout.groundtruth_csv());
  MockInvocation inv;
  inv.sequence_path = layout.root;
  inv.exp_id = "00000";
  inv.exp_folder = f.dir / "out";
  try {
    run_mock_method(inv);
    ADD_FAILURE();
  } catch (const MockError& e) {
    EXPECT_EQ(e.kind(), MockErrorKind::kMissingGroundTruth);
  }
}

}  // namespace
}  // namespace trajbench
