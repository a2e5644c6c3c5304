#include <benchmark/benchmark.h>

#include <Eigen/Geometry>

#include <random>
#include <vector>

#include "trajbench/camera.h"
#include "trajbench/evaluation.h"
#include "trajbench/reporting.h"
#include "trajbench/svd3.h"

namespace {

using namespace trajbench;

std::vector<Eigen::Vector3d> cloud(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Vector3d> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

void BM_JacobiSvd(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_svd(a));
}
BENCHMARK(BM_JacobiSvd);

void BM_Umeyama(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto src = cloud(static_cast<std::size_t>(state.range(0)), rng);
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  std::vector<Eigen::Vector3d> dst;
  for (const auto& p : src) dst.push_back(2.0 * (R * p) + Eigen::Vector3d(1, -1, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(umeyama_align(src, dst, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Umeyama)->Arg(20)->Arg(1000)->Arg(100000);

void BM_Associate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> est(n), gt(n);
  for (std::size_t i = 0; i < n; ++i) {
    est[i] = i / 30.0 + 0.004;
    gt[i] = i / 30.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(associate(est, gt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Associate)->Arg(1000)->Arg(100000);

void BM_UndistortPoint(benchmark::State& state) {
  CameraCalibration c;
  c.fx = c.fy = 500;
  c.cx = 320;
  c.cy = 240;
  c.width = 640;
  c.height = 480;
  c.fps = 30;
  c.k1 = -0.28;
  c.k2 = 0.07;
  c.p1 = 0.001;
  c.p2 = -0.002;
  const Point2 d = distort_point({0.5, -0.4}, c);
  for (auto _ : state) benchmark::DoNotOptimize(undistort_point(d, c));
}
BENCHMARK(BM_UndistortPoint);

void BM_UndistortImage(benchmark::State& state) {
  CameraCalibration c;
  c.fx = c.fy = 517.3;
  c.cx = 318.6;
  c.cy = 255.3;
  c.width = 640;
  c.height = 480;
  c.fps = 30;
  c.k1 = 0.2624;
  c.k2 = -0.9531;
  c.p1 = -0.0054;
  c.p2 = 0.0026;
  const UndistortMap map(c);
  Image img(640, 480, 3);
  std::mt19937_64 rng(3);
  for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng());
  for (auto _ : state) benchmark::DoNotOptimize(map.apply(img));
}
BENCHMARK(BM_UndistortImage)->Unit(benchmark::kMillisecond);

void BM_BoxplotStats(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> ln(-3.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = ln(rng);
  for (auto _ : state) benchmark::DoNotOptimize(boxplot_stats(v));
}
BENCHMARK(BM_BoxplotStats)->Arg(100)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
