#pragma once

#include <span>
#include <string>
#include <vector>

#include "trajbench/reporting.h"

namespace trajbench {

struct PlotStyle {
  int width = 800;
  int height = 500;
  std::string title;
  double radar_max = 3.0;  // radial clip for normalized ATE
  std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                      "#d62728", "#9467bd", "#8c564b",
                                      "#e377c2", "#7f7f7f"};
};

struct BoxplotSeries {
  std::string method;
  std::string sequence;
  BoxplotStats stats;
};

struct CumulativeSeries {
  std::string method;
  std::vector<double> thresholds;
  std::vector<std::size_t> counts;
};

// Every renderer returns a standalone, deterministic SVG document and throws
// ReportingError(kEmptySeries) when there is nothing to draw.
std::string render_boxplot_svg(std::span<const BoxplotSeries> series,
                               const PlotStyle& style = {});
// Log-scaled x axis.
std::string render_cumulative_svg(std::span<const CumulativeSeries> series,
                                  const PlotStyle& style = {});
// One axis per sequence, one closed polygon per method.
std::string render_radar_svg(const RadarValues& values,
                             std::span<const std::string> methods,
                             std::span<const std::string> sequences,
                             const PlotStyle& style = {});

// Convenience: derive every series from run records.
std::vector<BoxplotSeries> boxplot_series(std::span<const RunAteRecord> records);
std::vector<CumulativeSeries> cumulative_series(
    std::span<const RunAteRecord> records, std::span<const double> thresholds);

}  // namespace trajbench
