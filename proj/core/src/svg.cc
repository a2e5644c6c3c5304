#include "trajbench/svg.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace trajbench {

namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 160.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string header(const PlotStyle& style) {
  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      style.width, style.height);
  if (!style.title.empty()) {
    out += fmt::format(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{}"
        "</text>\n",
        num(style.width / 2.0), xml_escape(style.title));
  }
  return out;
}

const std::string& color(const PlotStyle& style, std::size_t i) {
  return style.palette[i % style.palette.size()];
}

std::string legend(const PlotStyle& style,
                   const std::vector<std::string>& names) {
  std::string out;
  const double x = style.width - kMarginRight + 20.0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMarginTop + 10.0 + 20.0 * static_cast<double>(i);
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n"
        "<text x=\"{}\" y=\"{}\">{}</text>\n",
        num(x), num(y - 10.0), color(style, i), num(x + 18.0), num(y),
        xml_escape(names[i]));
  }
  return out;
}

template <typename T>
std::vector<std::string> unique_in_order(const std::vector<T>& items,
                                         std::string T::*field) {
  std::vector<std::string> out;
  for (const auto& it : items) {
    if (std::find(out.begin(), out.end(), it.*field) == out.end()) {
      out.push_back(it.*field);
    }
  }
  return out;
}

}  // namespace

std::string render_boxplot_svg(std::span<const BoxplotSeries> series_span,
                               const PlotStyle& style) {
  if (series_span.empty()) {
    throw ReportingError(ReportingErrorKind::kEmptySeries,
                         "boxplot has no series");
  }
  const std::vector<BoxplotSeries> series(series_span.begin(),
                                          series_span.end());
  const auto methods = unique_in_order(series, &BoxplotSeries::method);
  const auto sequences = unique_in_order(series, &BoxplotSeries::sequence);

  double y_max = 0.0;
  for (const auto& s : series) {
    y_max = std::max(y_max, s.stats.whisker_high);
    for (const double o : s.stats.outliers) y_max = std::max(y_max, o);
  }
  if (!(y_max > 0.0)) y_max = 1.0;
  y_max *= 1.05;

  const double plot_w = style.width - kMarginLeft - kMarginRight;
  const double plot_h = style.height - kMarginTop - kMarginBottom;
  const double bottom = kMarginTop + plot_h;
  auto ypix = [&](double v) { return bottom - v / y_max * plot_h; };

  std::string out = header(style);
  out += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"black\"/>\n",
      num(kMarginLeft), num(kMarginTop), num(bottom),
      num(kMarginLeft + plot_w));
  for (int k = 0; k <= 5; ++k) {
    const double v = y_max * k / 5.0;
    out += fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n",
        num(kMarginLeft), num(ypix(v)), num(kMarginLeft + plot_w),
        num(ypix(v)), num(kMarginLeft - 6.0), num(ypix(v) + 4.0), v);
  }
  out += fmt::format(
      "<text x=\"18\" y=\"{}\" transform=\"rotate(-90 18 {})\" "
      "text-anchor=\"middle\">ATE RMSE [m]</text>\n",
      num(kMarginTop + plot_h / 2.0), num(kMarginTop + plot_h / 2.0));

  const double group_w = plot_w / static_cast<double>(sequences.size());
  const double box_w =
      std::min(40.0, 0.8 * group_w / static_cast<double>(methods.size()));
  for (std::size_t g = 0; g < sequences.size(); ++g) {
    const double gx = kMarginLeft + group_w * (static_cast<double>(g) + 0.5);
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(gx),
        num(bottom + 20.0), xml_escape(sequences[g]));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto it = std::find_if(series.begin(), series.end(), [&](auto& s) {
        return s.method == methods[m] && s.sequence == sequences[g];
      });
      if (it == series.end()) continue;
      const BoxplotStats& b = it->stats;
      const double cx =
          gx + (static_cast<double>(m) -
                (static_cast<double>(methods.size()) - 1.0) / 2.0) *
                   box_w * 1.1;
      const std::string& c = color(style, m);
      out += fmt::format("<g class=\"box\" data-method=\"{}\">\n",
                         xml_escape(methods[m]));
      out += fmt::format(
          "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{3}\"/>\n",
          num(cx), num(ypix(b.whisker_low)), num(ypix(b.whisker_high)), c);
      out += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
          "fill-opacity=\"0.5\" stroke=\"{}\"/>\n",
          num(cx - box_w / 2.0), num(ypix(b.q3)), num(box_w),
          num(std::max(ypix(b.q1) - ypix(b.q3), 0.5)), c, c);
      out += fmt::format(
          "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"black\" "
          "stroke-width=\"2\"/>\n",
          num(cx - box_w / 2.0), num(cx + box_w / 2.0), num(ypix(b.median)));
      for (const double o : b.outliers) {
        out += fmt::format(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"none\" "
            "stroke=\"{}\"/>\n",
            num(cx), num(ypix(o)), c);
      }
      out += "</g>\n";
    }
  }
  out += legend(style, methods);
  out += "</svg>\n";
  return out;
}

std::string render_cumulative_svg(std::span<const CumulativeSeries> series,
                                  const PlotStyle& style) {
  if (series.empty() ||
      std::all_of(series.begin(), series.end(),
                  [](const auto& s) { return s.thresholds.empty(); })) {
    throw ReportingError(ReportingErrorKind::kEmptySeries,
                         "cumulative plot has no series");
  }
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = 0.0;
  std::size_t y_max = 1;
  for (const auto& s : series) {
    for (const double t : s.thresholds) {
      x_lo = std::min(x_lo, t);
      x_hi = std::max(x_hi, t);
    }
    for (const auto c : s.counts) y_max = std::max(y_max, c);
  }
  if (!(x_hi > x_lo)) x_hi = x_lo * 10.0;
  const double lx_lo = std::log10(x_lo);
  const double lx_hi = std::log10(x_hi);

  const double plot_w = style.width - kMarginLeft - kMarginRight;
  const double plot_h = style.height - kMarginTop - kMarginBottom;
  const double bottom = kMarginTop + plot_h;
  auto xpix = [&](double t) {
    return kMarginLeft + (std::log10(t) - lx_lo) / (lx_hi - lx_lo) * plot_w;
  };
  auto ypix = [&](double c) {
    return bottom - c / static_cast<double>(y_max) * plot_h;
  };

  std::string out = header(style);
  out += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\" stroke=\"black\"/>\n",
      num(kMarginLeft), num(kMarginTop), num(bottom),
      num(kMarginLeft + plot_w));
  for (int e = static_cast<int>(std::ceil(lx_lo - 1e-12));
       e <= static_cast<int>(std::floor(lx_hi + 1e-12)); ++e) {
    const double t = std::pow(10.0, e);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\"/>"
        "\n<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4:g}</text>\n",
        num(xpix(t)), num(kMarginTop), num(bottom), num(bottom + 18.0), t);
  }
  out += fmt::format(
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">ATE threshold [m] (log "
      "scale)</text>\n",
      num(kMarginLeft + plot_w / 2.0), num(bottom + 40.0));
  out += fmt::format(
      "<text x=\"18\" y=\"{0}\" transform=\"rotate(-90 18 {0})\" "
      "text-anchor=\"middle\">runs below threshold</text>\n",
      num(kMarginTop + plot_h / 2.0));
  for (int k = 0; k <= 4; ++k) {
    const double c = static_cast<double>(y_max) * k / 4.0;
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n",
        num(kMarginLeft - 6.0), num(ypix(c) + 4.0), c);
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    names.push_back(s.method);
    std::string points;
    for (std::size_t k = 0; k < s.thresholds.size(); ++k) {
      if (k > 0) {
        // Step: hold the previous count up to the next threshold.
        points += fmt::format("{},{} ", num(xpix(s.thresholds[k])),
                              num(ypix(static_cast<double>(s.counts[k - 1]))));
      }
      points += fmt::format("{},{} ", num(xpix(s.thresholds[k])),
                            num(ypix(static_cast<double>(s.counts[k]))));
    }
    if (!points.empty()) points.pop_back();
    out += fmt::format(
        "<polyline class=\"curve\" data-method=\"{}\" fill=\"none\" "
        "stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
        xml_escape(s.method), color(style, i), points);
  }
  out += legend(style, names);
  out += "</svg>\n";
  return out;
}

std::string render_radar_svg(const RadarValues& values,
                             std::span<const std::string> methods,
                             std::span<const std::string> sequences,
                             const PlotStyle& style) {
  if (methods.empty() || sequences.empty()) {
    throw ReportingError(ReportingErrorKind::kEmptySeries,
                         "radar plot needs at least one method and sequence");
  }
  const double cx = (style.width - kMarginRight) / 2.0 + 20.0;
  const double cy = style.height / 2.0 + 10.0;
  const double radius =
      std::min(style.width - kMarginRight, static_cast<double>(style.height)) /
          2.0 -
      60.0;
  const std::size_t n = sequences.size();
  auto angle = [&](std::size_t k) {
    return -std::numbers::pi / 2.0 +
           2.0 * std::numbers::pi * static_cast<double>(k) /
               static_cast<double>(n);
  };

  std::string out = header(style);
  const int rings = std::max(1, static_cast<int>(std::ceil(style.radar_max)));
  for (int r = 1; r <= rings; ++r) {
    const double rv = std::min(static_cast<double>(r), style.radar_max);
    out += fmt::format(
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" "
        "stroke=\"#dddddd\"/>\n"
        "<text x=\"{}\" y=\"{}\" fill=\"#888888\">{:g}</text>\n",
        num(cx), num(cy), num(radius * rv / style.radar_max), num(cx + 3.0),
        num(cy - radius * rv / style.radar_max - 2.0), rv);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double a = angle(k);
    const double ex = cx + radius * std::cos(a);
    const double ey = cy + radius * std::sin(a);
    out += fmt::format(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
        "stroke=\"#999999\"/>\n"
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        num(cx), num(cy), num(ex), num(ey),
        num(cx + (radius + 22.0) * std::cos(a)),
        num(cy + (radius + 22.0) * std::sin(a) + 4.0),
        xml_escape(sequences[k]));
  }

  std::vector<std::string> names(methods.begin(), methods.end());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::string points;
    for (std::size_t k = 0; k < n; ++k) {
      const auto it = values.median_normalized.find({methods[m], sequences[k]});
      // A method without successful runs sits on the clip radius.
      const double v = it == values.median_normalized.end()
                           ? style.radar_max
                           : std::min(it->second, style.radar_max);
      const double r = radius * v / style.radar_max;
      points += fmt::format("{},{} ", num(cx + r * std::cos(angle(k))),
                            num(cy + r * std::sin(angle(k))));
    }
    points.pop_back();
    out += fmt::format(
        "<polygon class=\"method\" data-method=\"{}\" points=\"{}\" "
        "fill=\"{}\" fill-opacity=\"0.2\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        xml_escape(methods[m]), points, color(style, m), color(style, m));
  }
  out += legend(style, names);
  out += "</svg>\n";
  return out;
}

std::vector<BoxplotSeries> boxplot_series(
    std::span<const RunAteRecord> records) {
  std::vector<BoxplotSeries> out;
  for (const auto& method : methods_of(records)) {
    for (const auto& sequence : sequences_of(records)) {
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.method == method && r.sequence == sequence && r.succeeded()) {
          values.push_back(*r.rmse);
        }
      }
      if (!values.empty()) {
        out.push_back({method, sequence, boxplot_stats(values)});
      }
    }
  }
  return out;
}

std::vector<CumulativeSeries> cumulative_series(
    std::span<const RunAteRecord> records, std::span<const double> thresholds) {
  std::vector<CumulativeSeries> out;
  for (const auto& method : methods_of(records)) {
    std::vector<double> values;
    for (const auto& r : records) {
      if (r.method == method && r.succeeded()) values.push_back(*r.rmse);
    }
    out.push_back({method,
                   std::vector<double>(thresholds.begin(), thresholds.end()),
                   cumulative_curve(values, thresholds)});
  }
  return out;
}

}  // namespace trajbench
