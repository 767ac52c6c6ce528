// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>

#include "facepose/landmarks.hpp"
#include "facepose/poseclassify.hpp"
#include "facepose/preprocess.hpp"
#include "facepose/range_image.hpp"

namespace facepose {

/// Every tunable of the detection pipeline.
struct RunConfig {
  /// Explicit crop window; when unset the central band rows/cols
  /// [15%, 85%) of the input is used, i.e. [15, 85) on a 100x100 grid.
  std::optional<CropSpec> crop;
  SmoothSpec smooth;
  ClassifierConfig classifier;
  std::size_t fit_window = 7;
  double pixel_pitch = 1.0;  ///< mm per pixel
  EyeRoiSpec roi;

  void validate() const;
  CropSpec crop_for(std::size_t width, std::size_t height) const;
};

/// Landmarks of one scan, in the coordinates of the input image. Depths are
/// read from the smoothed image.
struct FaceAnalysis {
  CropSpec crop;
  double otsu_threshold = 0.0;
  bool otsu_degenerate = false;
  Landmark nose;
  /// Corner score at the nose tip under the ROI score mode; NaN where the
  /// curvature fit is undefined.
  double nose_score = 0.0;
  EyeCorners eyes;
};

/// Crop, Otsu, smooth, nose tip, curvature, eye corners. NoseNotFound and
/// EyeCornersNotFound propagate unchanged.
FaceAnalysis analyze_face(const RangeImage& image, const RunConfig& config);

struct Detection {
  FaceAnalysis frontal;
  FaceAnalysis rotated;
  PoseReport report;
};

/// Throws DimensionError when the two scans differ in size.
Detection detect_pose(const RangeImage& frontal, const RangeImage& rotated, const RunConfig& config);

}  // namespace facepose
