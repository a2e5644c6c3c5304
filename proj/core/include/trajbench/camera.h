#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajbench/error.h"

namespace trajbench {

enum class CameraErrorKind { kInvalidCalibration, kNoConvergence, kBadImage };

using CameraError = KindedError<CameraErrorKind, ErrorCategory::kData>;

// Pinhole intrinsics plus radial-tangential (k1, k2, k3, p1, p2) distortion.
struct CameraCalibration {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  double p1 = 0.0, p2 = 0.0;
  int width = 0, height = 0;
  double fps = 0.0;

  bool has_distortion() const {
    return k1 != 0.0 || k2 != 0.0 || k3 != 0.0 || p1 != 0.0 || p2 != 0.0;
  }
  CameraCalibration without_distortion() const;
};

// Throws CameraError(kInvalidCalibration) listing the violated invariant.
void validate_calibration(const CameraCalibration& calib);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

Point2 distort_point(Point2 normalized, const CameraCalibration& calib);

// Fixed-point inversion of distort_point, at most 50 iterations, stopping
// once the update is below 1e-10. Throws kNoConvergence otherwise.
Point2 undistort_point(Point2 distorted, const CameraCalibration& calib);

// Interleaved 8-bit image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image&) const = default;
};

// Per-pixel source coordinates for undistorting images of one camera.
// Built once per calibration and shared read-only between frames.
class UndistortMap {
 public:
  explicit UndistortMap(const CameraCalibration& calib);

  // Bilinear resampling; samples falling outside the source are black.
  Image apply(const Image& distorted) const;

  const CameraCalibration& source_calibration() const { return calib_; }
  CameraCalibration target_calibration() const {
    return calib_.without_distortion();
  }

 private:
  CameraCalibration calib_;
  bool identity_ = false;
  std::vector<float> map_x_;
  std::vector<float> map_y_;
};

// Returns the undistorted image and the distortion-free calibration.
std::pair<Image, CameraCalibration> undistort_image(
    const Image& image, const CameraCalibration& calib);

// Image container I/O (PNG, JPEG, ... by extension).
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& image);

}  // namespace trajbench
