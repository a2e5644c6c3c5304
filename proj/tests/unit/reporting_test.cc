#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testing/oracles.h"
#include "trajbench/reporting.h"

namespace trajbench {
namespace {

RunAteRecord ok_run(const std::string& method, const std::string& seq, std::size_t run,
                    double rmse) {
  RunAteRecord r;
  r.experiment = "exp";
  r.method = method;
  r.dataset = "synthetic";
  r.sequence = seq;
  r.run_index = run;
  r.rmse = rmse;
  r.num_pairs = 98;
  r.num_estimated = 100;
  r.num_gt = 120;
  r.num_total = 120;
  return r;
}

RunAteRecord failed_run(const std::string& method, const std::string& seq, std::size_t run) {
  RunAteRecord r;
  r.experiment = "exp";
  r.method = method;
  r.dataset = "synthetic";
  r.sequence = seq;
  r.run_index = run;
  r.status = "failed";
  r.num_total = 120;
  return r;
}

TEST(Boxplot, Singleton) {
  const std::vector<double> v = {5.0};
  const BoxplotStats s = boxplot_stats(v);
  EXPECT_EQ(s.median, 5.0);
  EXPECT_EQ(s.q1, 5.0);
  EXPECT_EQ(s.q3, 5.0);
  EXPECT_EQ(s.whisker_low, 5.0);
  EXPECT_EQ(s.whisker_high, 5.0);
  EXPECT_TRUE(s.outliers.empty());
  EXPECT_EQ(s.n, 1u);
}

TEST(Boxplot, OutlierBeyondFence) {
  const std::vector<double> v = {100, 3, 1, 4, 2};
  const BoxplotStats s = boxplot_stats(v);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.q1, 2.0);
  EXPECT_EQ(s.q3, 4.0);
  EXPECT_EQ(s.whisker_low, 1.0);
  EXPECT_EQ(s.whisker_high, 4.0);
  EXPECT_EQ(s.outliers, std::vector<double>{100.0});
}

TEST(Boxplot, InterpolatedQuartiles) {
  const std::vector<double> v = {1, 2, 3, 4};
  const BoxplotStats s = boxplot_stats(v);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
}

TEST(Boxplot, EmptyThrows) {
  try {
    boxplot_stats(std::vector<double>{});
    ADD_FAILURE();
  } catch (const ReportingError& e) {
    EXPECT_EQ(e.kind(), ReportingErrorKind::kEmptyInput);
  }
}

TEST(Boxplot, MatchesReferenceOnRandomLists) {
  testing::Rng rng(12);
  std::uniform_int_distribution<int> len(1, 30);
  std::lognormal_distribution<double> val(-3.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = val(rng);
    const BoxplotStats s = boxplot_stats(v);
    const testing::ReferenceBox ref = testing::reference_boxplot(v);
    EXPECT_NEAR(s.median, ref.median, 1e-12);
    EXPECT_NEAR(s.q1, ref.q1, 1e-12);
    EXPECT_NEAR(s.q3, ref.q3, 1e-12);
    EXPECT_EQ(s.whisker_low, ref.whisker_low);
    EXPECT_EQ(s.whisker_high, ref.whisker_high);
    EXPECT_EQ(s.outliers, ref.outliers);
  }
}

TEST(Cumulative, DirectCount) {
  const std::vector<double> v = {0.01, 0.02, 0.05}, th = {0.015, 0.03, 0.1};
  EXPECT_EQ(cumulative_curve(v, th), (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Cumulative, EmptyValuesAndInclusiveBoundary) {
  const std::vector<double> th = {0.1, 0.2};
  EXPECT_EQ(cumulative_curve(std::vector<double>{}, th), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(cumulative_curve(std::vector<double>{0.1, 0.2}, th),
            (std::vector<std::size_t>{1, 2}));
}

TEST(Cumulative, LogThresholds) {
  const auto th = log_thresholds();
  ASSERT_EQ(th.size(), 256u);
  EXPECT_DOUBLE_EQ(th.front(), 1e-3);
  EXPECT_DOUBLE_EQ(th.back(), 10.0);
  for (std::size_t i = 1; i < th.size(); ++i) EXPECT_GT(th[i], th[i - 1]);
  EXPECT_NEAR(th[1] / th[0], th[255] / th[254], 1e-9);
}

TEST(Radar, SingleMethodIsOne) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.1), ok_run("A", "s", 1, 0.3),
                                          ok_run("A", "s", 2, 0.2)};
  const RadarValues r = radar_normalize(recs);
  EXPECT_DOUBLE_EQ(r.median_normalized.at({"A", "s"}), 1.0);
}

TEST(Radar, PooledMedianExample) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.02), ok_run("A", "s", 1, 0.04),
                                          ok_run("B", "s", 0, 0.06), ok_run("B", "s", 1, 0.08),
                                          failed_run("B", "s", 2)};
  const RadarValues r = radar_normalize(recs);
  EXPECT_NEAR(r.denominators.at("s"), 0.05, 1e-15);
  EXPECT_NEAR(r.median_normalized.at({"A", "s"}), 0.6, 1e-12);
  EXPECT_NEAR(r.median_normalized.at({"B", "s"}), 1.4, 1e-12);
  EXPECT_NEAR((r.per_run.at({"B", "s", 1})), 1.6, 1e-12);
  EXPECT_EQ(r.per_run.count({"B", "s", 2}), 0u);
}

TEST(Radar, ZeroDenominator) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.0), ok_run("A", "s", 1, 0.0)};
  try {
    radar_normalize(recs);
    ADD_FAILURE();
  } catch (const ReportingError& e) {
    EXPECT_EQ(e.kind(), ReportingErrorKind::kZeroDenominator);
    EXPECT_NE(std::string(e.what()).find("s"), std::string::npos);
  }
}

TEST(Radar, ScaleInvariantPerSequence) {
  testing::Rng rng(2);
  std::uniform_real_distribution<double> u(0.001, 1.0), c(0.01, 100.0);
  std::vector<RunAteRecord> recs, scaled;
  const double cs = c(rng);
  for (const char* m : {"A", "B", "C"}) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double v = u(rng);
      recs.push_back(ok_run(m, "s", k, v));
      scaled.push_back(ok_run(m, "s", k, v * cs));
    }
  }
  const RadarValues a = radar_normalize(recs), b = radar_normalize(scaled);
  for (const auto& [key, v] : a.median_normalized) {
    EXPECT_NEAR(b.median_normalized.at(key), v, 1e-12 * v);
  }
}

TEST(FrameCoverage, CopiesCounts) {
  RunAteRecord k = ok_run("kf", "s", 0, 0.1);
  k.num_estimated = 40;
  k.num_pairs = 40;
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.1), failed_run("A", "s", 1), k};
  const auto rows = frame_coverage_table(recs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].num_estimated, 100u);
  EXPECT_EQ(rows[0].num_pairs, 98u);
  EXPECT_EQ(rows[0].num_total, 120u);
  EXPECT_EQ(rows[1].status, "failed");
  EXPECT_EQ(rows[1].num_estimated, 0u);
  EXPECT_LE(rows[2].num_estimated, rows[2].num_total);
}

TEST(AteSummary, CsvRoundTripIsExact) {
  testing::Rng rng(6);
  std::lognormal_distribution<double> val(-3.0, 1.0);
  std::vector<RunAteRecord> recs;
  for (std::size_t k = 0; k < 50; ++k) {
    recs.push_back(k % 7 == 3 ? failed_run("m,quoted", "seq", k) : ok_run("m", "seq", k, val(rng)));
  }
  const csv::Table t = ate_summary_table(recs);
  EXPECT_EQ(csv::join(t.header), kAteSummaryHeader);
  EXPECT_EQ(parse_ate_summary(csv::parse_table(csv::format_table(t))), recs);
}

TEST(AteSummary, RejectsWrongHeader) {
  EXPECT_THROW(parse_ate_summary(csv::parse_table("a,b\n1,2\n")), ReportingError);
}

TEST(ReportTables, BoxplotCountsFailures) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.02), ok_run("A", "s", 1, 0.04),
                                          failed_run("A", "s", 2), failed_run("B", "s", 0)};
  const csv::Table t = boxplot_table(recs);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][t.column("n")], "2");
  EXPECT_EQ(t.rows[0][t.column("num_failed")], "1");
  EXPECT_EQ(std::stod(t.rows[0][t.column("median")]), 0.03);
  EXPECT_EQ(t.rows[1][t.column("n")], "0");
  EXPECT_EQ(t.rows[1][t.column("failure_rate")], "1");
  // Re-parses to the same table.
  const csv::Table back = csv::parse_table(csv::format_table(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(ReportTables, CumulativePooledAndPerSequence) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s1", 0, 0.02), ok_run("A", "s2", 0, 0.5)};
  const std::vector<double> th = {0.1, 1.0};
  const csv::Table t = cumulative_table(recs, th);
  ASSERT_EQ(t.rows.size(), 6u);  // (*, s1, s2) x 2 thresholds
  EXPECT_EQ(t.rows[0], (csv::Row{"A", "*", "0.1", "1"}));
  EXPECT_EQ(t.rows[1], (csv::Row{"A", "*", "1", "2"}));
  EXPECT_EQ(t.rows[4], (csv::Row{"A", "s2", "0.1", "0"}));
}

TEST(ReportTables, RadarRowsRoundTrip) {
  const std::vector<RunAteRecord> recs = {ok_run("A", "s", 0, 0.02), ok_run("B", "s", 0, 0.06)};
  const csv::Table t = radar_table(radar_normalize(recs));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0][0], "median");
  EXPECT_EQ(t.rows[2][0], "run");
  const csv::Table back = csv::parse_table(csv::format_table(t));
  EXPECT_EQ(back.rows, t.rows);
}

}  // namespace
}  // namespace trajbench
