// SPDX-License-Identifier: Apache-2.0

#include "facepose/pipeline.hpp"

#include <cmath>
#include <limits>

#include "facepose/errors.hpp"

namespace facepose {

void RunConfig::validate() const {
  smooth.validate();
  classifier.validate();
  roi.validate();
  if (fit_window < 5 || fit_window % 2 == 0) throw SpecError("fit window must be odd and >= 5");
  if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch)) throw SpecError("pixel pitch must be positive");
}

CropSpec RunConfig::crop_for(std::size_t width, std::size_t height) const {
  if (crop) return *crop;
  const auto band = [](std::size_t extent, double frac) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(extent) * frac));
  };
  return CropSpec{band(height, 0.15), band(height, 0.85), band(width, 0.15), band(width, 0.85)};
}

FaceAnalysis analyze_face(const RangeImage& image, const RunConfig& config) {
  config.validate();
  FaceAnalysis out;
  out.crop = config.crop_for(image.width(), image.height());
  const RangeImage cropped = crop_face(image, out.crop);
  const OtsuResult otsu = otsu_threshold(cropped);
  out.otsu_threshold = otsu.threshold;
  out.otsu_degenerate = otsu.degenerate;
  const RangeImage smoothed = gaussian_smooth(otsu.masked, config.smooth);

  const Landmark nose = detect_nose_tip(smoothed);
  const CurvatureMap curv = curvature_map(smoothed, config.fit_window, config.pixel_pitch);
  const EyeCorners eyes = detect_eye_corners(smoothed, curv, nose, config.roi);

  const auto shift = [&](Landmark p) {
    p.row += out.crop.row_begin;
    p.col += out.crop.col_begin;
    return p;
  };
  out.nose_score = curv.defined(nose.row, nose.col) ? corner_score(curv, nose.row, nose.col, config.roi.score)
                                                    : std::numeric_limits<double>::quiet_NaN();
  out.nose = shift(nose);
  out.eyes = eyes;
  out.eyes.first.point = shift(eyes.first.point);
  out.eyes.second.point = shift(eyes.second.point);
  return out;
}

Detection detect_pose(const RangeImage& frontal, const RangeImage& rotated, const RunConfig& config) {
  if (frontal.width() != rotated.width() || frontal.height() != rotated.height()) {
    throw DimensionError("frontal and rotated scans must share grid dimensions");
  }
  Detection d{analyze_face(frontal, config), analyze_face(rotated, config), {}};
  d.report = classify_pose(PoseInput{d.frontal.nose, d.rotated.nose, d.rotated.eyes, d.frontal.eyes},
                           config.classifier);
  return d;
}

}  // namespace facepose
