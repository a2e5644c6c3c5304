#include "trajbench/camera.h"

#include <fmt/format.h>

#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace trajbench {

namespace {

constexpr int kMaxFixedPointIterations = 50;
constexpr int kMaxNewtonIterations = 20;
constexpr double kUpdateTolerance = 1e-10;

struct DistortionTerms {
  double radial;
  double tx;
  double ty;
};

DistortionTerms terms(double x, double y, const CameraCalibration& c) {
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
  const double tx = 2.0 * c.p1 * x * y + c.p2 * (r2 + 2.0 * x * x);
  const double ty = c.p1 * (r2 + 2.0 * y * y) + 2.0 * c.p2 * x * y;
  return {radial, tx, ty};
}

// Newton's method on distort(x) - target, used when the plain fixed-point
// iteration contracts too slowly (strong barrel distortion near the fold).
bool newton_refine(Point2 target, const CameraCalibration& c, Point2& x) {
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const Point2 d = distort_point(x, c);
    const double fx = d.x - target.x;
    const double fy = d.y - target.y;
    const double r2 = x.x * x.x + x.y * x.y;
    const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
    const double dradial_dr2 = c.k1 + r2 * (2.0 * c.k2 + 3.0 * r2 * c.k3);
    const double j00 = radial + 2.0 * x.x * x.x * dradial_dr2 +
                       2.0 * c.p1 * x.y + 6.0 * c.p2 * x.x;
    const double j01 = 2.0 * x.x * x.y * dradial_dr2 + 2.0 * c.p1 * x.x +
                       2.0 * c.p2 * x.y;
    const double j10 = 2.0 * x.x * x.y * dradial_dr2 + 2.0 * c.p1 * x.x +
                       2.0 * c.p2 * x.y;
    const double j11 = radial + 2.0 * x.y * x.y * dradial_dr2 +
                       6.0 * c.p1 * x.y + 2.0 * c.p2 * x.x;
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || std::abs(det) < 1e-14) return false;
    const double dx = (j11 * fx - j01 * fy) / det;
    const double dy = (j00 * fy - j10 * fx) / det;
    x.x -= dx;
    x.y -= dy;
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) return false;
    if (std::max(std::abs(dx), std::abs(dy)) < kUpdateTolerance) return true;
  }
  return false;
}

}  // namespace

CameraCalibration CameraCalibration::without_distortion() const {
  CameraCalibration out = *this;
  out.k1 = out.k2 = out.k3 = out.p1 = out.p2 = 0.0;
  return out;
}

void validate_calibration(const CameraCalibration& c) {
  auto fail = [](const std::string& what) {
    throw CameraError(CameraErrorKind::kInvalidCalibration,
                      "invalid calibration: " + what);
  };
  if (!(c.fx > 0.0) || !(c.fy > 0.0)) fail("fx and fy must be positive");
  if (c.width <= 0 || c.height <= 0) fail("width and height must be positive");
  if (!(c.cx >= 0.0 && c.cx < c.width)) fail("cx must lie in [0, width)");
  if (!(c.cy >= 0.0 && c.cy < c.height)) fail("cy must lie in [0, height)");
  if (!(c.fps > 0.0)) fail("fps must be positive");
  for (const double k : {c.k1, c.k2, c.k3, c.p1, c.p2}) {
    if (!std::isfinite(k)) fail("distortion coefficients must be finite");
  }
}

Point2 distort_point(Point2 n, const CameraCalibration& c) {
  const DistortionTerms t = terms(n.x, n.y, c);
  return {n.x * t.radial + t.tx, n.y * t.radial + t.ty};
}

Point2 undistort_point(Point2 d, const CameraCalibration& c) {
  Point2 x = d;
  for (int it = 0; it < kMaxFixedPointIterations; ++it) {
    const DistortionTerms t = terms(x.x, x.y, c);
    const Point2 next{(d.x - t.tx) / t.radial, (d.y - t.ty) / t.radial};
    const double update =
        std::max(std::abs(next.x - x.x), std::abs(next.y - x.y));
    x = next;
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) break;
    if (update < kUpdateTolerance) return x;
  }
  Point2 refined = std::isfinite(x.x) && std::isfinite(x.y) ? x : d;
  if (newton_refine(d, c, refined)) return refined;
  throw CameraError(CameraErrorKind::kNoConvergence,
                    fmt::format("undistortion did not converge at ({}, {})",
                                d.x, d.y));
}

UndistortMap::UndistortMap(const CameraCalibration& calib) : calib_(calib) {
  validate_calibration(calib);
  identity_ = !calib.has_distortion();
  if (identity_) return;
  const std::size_t n = static_cast<std::size_t>(calib.width) * calib.height;
  map_x_.resize(n);
  map_y_.resize(n);
  for (int v = 0; v < calib.height; ++v) {
    for (int u = 0; u < calib.width; ++u) {
      const Point2 ideal{(u - calib.cx) / calib.fx, (v - calib.cy) / calib.fy};
      const Point2 d = distort_point(ideal, calib);
      const std::size_t k = static_cast<std::size_t>(v) * calib.width + u;
      map_x_[k] = static_cast<float>(calib.fx * d.x + calib.cx);
      map_y_[k] = static_cast<float>(calib.fy * d.y + calib.cy);
    }
  }
}

Image UndistortMap::apply(const Image& src) const {
  if (src.width != calib_.width || src.height != calib_.height) {
    throw CameraError(
        CameraErrorKind::kBadImage,
        fmt::format("image is {}x{} but calibration expects {}x{}", src.width,
                    src.height, calib_.width, calib_.height));
  }
  if (identity_) return src;

  Image out(src.width, src.height, src.channels);
  for (int v = 0; v < src.height; ++v) {
    for (int u = 0; u < src.width; ++u) {
      const std::size_t k = static_cast<std::size_t>(v) * src.width + u;
      const double sx = map_x_[k];
      const double sy = map_y_[k];
      if (!(sx >= 0.0 && sy >= 0.0 && sx <= src.width - 1 &&
            sy <= src.height - 1)) {
        continue;
      }
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double ax = sx - x0;
      const double ay = sy - y0;
      for (int ch = 0; ch < src.channels; ++ch) {
        const double top = (1.0 - ax) * src.at(x0, y0, ch) + ax * src.at(x1, y0, ch);
        const double bottom =
            (1.0 - ax) * src.at(x0, y1, ch) + ax * src.at(x1, y1, ch);
        const double value = (1.0 - ay) * top + ay * bottom;
        out.at(u, v, ch) =
            static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  return out;
}

std::pair<Image, CameraCalibration> undistort_image(
    const Image& image, const CameraCalibration& calib) {
  const UndistortMap map(calib);
  return {map.apply(image), map.target_calibration()};
}

Image read_image(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) {
    throw CameraError(CameraErrorKind::kBadImage,
                      fmt::format("cannot decode image '{}'", path));
  }
  if (mat.depth() != CV_8U) {
    mat.convertTo(mat, CV_8U, mat.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
  }
  if (mat.channels() == 4) cv::cvtColor(mat, mat, cv::COLOR_BGRA2BGR);
  if (mat.channels() == 3) cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
  Image img(mat.cols, mat.rows, mat.channels());
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    std::copy(row, row + static_cast<std::size_t>(mat.cols) * img.channels,
              img.pixels.begin() +
                  static_cast<std::ptrdiff_t>(y) * mat.cols * img.channels);
  }
  return img;
}

void write_image(const std::string& path, const Image& image) {
  const int type = image.channels == 3 ? CV_8UC3 : CV_8UC1;
  if (image.channels != 1 && image.channels != 3) {
    throw CameraError(CameraErrorKind::kBadImage,
                      "only 1- and 3-channel images can be written");
  }
  cv::Mat mat(image.height, image.width, type,
              const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat out;  // must not alias mat: cvtColor would write into image
  if (image.channels == 3) {
    cv::cvtColor(mat, out, cv::COLOR_RGB2BGR);
  } else {
    out = mat;
  }
  if (!cv::imwrite(path, out)) {
    throw CameraError(CameraErrorKind::kBadImage,
                      fmt::format("cannot write image '{}'", path));
  }
}

}  // namespace trajbench
