#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajbench/camera.h"
#include "trajbench/dataset.h"

namespace trajbench {

// Working directories handed to each adapter step.
struct PrepareContext {
  std::string sequence;
  std::filesystem::path dataset_root;  // <benchmark>/<dataset>
  std::filesystem::path staging;       // layout under construction
  std::filesystem::path scratch;       // downloads and raw extraction

  SequenceLayout layout() const { return {staging}; }
};

// Converts one dataset's native format to the standardized layout. The
// steps run in declaration order; each writes only below ctx.staging or
// ctx.scratch.
class DatasetAdapter {
 public:
  virtual ~DatasetAdapter() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> catalog() const = 0;
  // Whether `sequence` can be produced by this adapter.
  virtual bool knows(const std::string& sequence) const;

  virtual void download_sequence_data(const PrepareContext& ctx) = 0;
  virtual void create_rgb_folder(const PrepareContext& ctx) = 0;
  virtual void create_calibration_yaml(const PrepareContext& ctx) = 0;
  virtual void create_rgb_csv(const PrepareContext& ctx) = 0;
  virtual void create_groundtruth_csv(const PrepareContext& ctx) = 0;
};

// Runs the five adapter steps in a staging directory
// (<dataset_root>/.staging/<sequence>), validates the result and renames it
// to <dataset_root>/<sequence>. A sequence that already validates is left
// untouched. Concurrent preparation of the same sequence is serialized by an
// advisory lock file.
SequenceLayout prepare_sequence(DatasetAdapter& adapter,
                                const std::string& sequence,
                                const std::filesystem::path& dataset_root);

struct SyntheticOptions {
  std::uint64_t seed = 0;
  std::size_t num_frames = 300;
  double fps = 30.0;
  int width = 64;
  int height = 48;
};

// Seeded analytic camera path (circle plus sinusoidal height) with
// flat-color-plus-noise frames. Needs no network.
class SyntheticAdapter : public DatasetAdapter {
 public:
  explicit SyntheticAdapter(SyntheticOptions options = {});

  std::string name() const override { return "synthetic"; }
  std::vector<std::string> catalog() const override;
  bool knows(const std::string& sequence) const override;

  void download_sequence_data(const PrepareContext& ctx) override;
  void create_rgb_folder(const PrepareContext& ctx) override;
  void create_calibration_yaml(const PrepareContext& ctx) override;
  void create_rgb_csv(const PrepareContext& ctx) override;
  void create_groundtruth_csv(const PrepareContext& ctx) override;

  CameraCalibration calibration() const;
  // Ground-truth trajectory of a sequence; deterministic in (seed, name).
  Trajectory ground_truth(const std::string& sequence) const;

 private:
  std::uint64_t sequence_seed(const std::string& sequence) const;

  SyntheticOptions options_;
};

// TUM RGB-D "rgbd_dataset_<sequence>.tgz" archives: space-separated
// rgb.txt/groundtruth.txt and distorted PNG frames. Frames are undistorted
// during conversion.
class TumRgbdAdapter : public DatasetAdapter {
 public:
  static constexpr const char* kDefaultBaseUrl =
      "https://cvg.cit.tum.de/rgbd/dataset";

  explicit TumRgbdAdapter(std::string base_url = kDefaultBaseUrl);

  std::string name() const override { return "tum_rgbd"; }
  std::vector<std::string> catalog() const override;
  bool knows(const std::string& sequence) const override;

  void download_sequence_data(const PrepareContext& ctx) override;
  void create_rgb_folder(const PrepareContext& ctx) override;
  void create_calibration_yaml(const PrepareContext& ctx) override;
  void create_rgb_csv(const PrepareContext& ctx) override;
  void create_groundtruth_csv(const PrepareContext& ctx) override;

  // Factory intrinsics per freiburg camera (1, 2 or 3).
  static CameraCalibration calibration_for(const std::string& sequence);
  std::string archive_url(const std::string& sequence) const;

 private:
  std::filesystem::path extracted_dir(const PrepareContext& ctx) const;

  std::string base_url_;
};

// Known adapters: "synthetic", "tum_rgbd" (alias "rgbdtum"). Returns nullptr
// otherwise.
std::unique_ptr<DatasetAdapter> make_adapter(const std::string& dataset,
                                             std::uint64_t seed = 0);

}  // namespace trajbench
