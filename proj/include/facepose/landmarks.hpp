// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "facepose/range_image.hpp"

namespace facepose {

/// A facial feature point in pixel coordinates of the image it was found in.
struct Landmark {
  std::size_t row = 0;
  std::size_t col = 0;
  double depth = 0.0;

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Nose tip by the maximum-intensity rule: the interior pixel whose fully
/// valid 3x3 neighbourhood has the largest depth sum. Ties go to the first
/// window in row-major order.
///
/// Throws NoseNotFound when no fully valid 3x3 window exists, or when there
/// are several windows and every one of them has the same sum (a flat image
/// has no maximum).
Landmark detect_nose_tip(const RangeImage& image);

/// Per-pixel curvature of the depth surface from a local least-squares
/// quadric z = a u^2 + b uv + c v^2 + d u + e v + f (u along columns, v along
/// rows, both in mm). A pixel is defined only when its whole fit window lies
/// inside the image and is valid.
class CurvatureMap {
 public:
  CurvatureMap(std::size_t width, std::size_t height, std::size_t fit_window, double pixel_pitch);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t fit_window() const noexcept { return fit_window_; }
  double pixel_pitch() const noexcept { return pixel_pitch_; }

  bool defined(std::size_t row, std::size_t col) const noexcept { return defined_[idx(row, col)] != 0; }
  double mean(std::size_t row, std::size_t col) const noexcept { return mean_[idx(row, col)]; }
  double gaussian(std::size_t row, std::size_t col) const noexcept { return gauss_[idx(row, col)]; }
  double k1(std::size_t row, std::size_t col) const noexcept { return k1_[idx(row, col)]; }
  double k2(std::size_t row, std::size_t col) const noexcept { return k2_[idx(row, col)]; }

  std::size_t defined_count() const noexcept;

  void set(std::size_t row, std::size_t col, double mean, double gaussian, double k1, double k2);

 private:
  std::size_t idx(std::size_t row, std::size_t col) const noexcept { return row * width_ + col; }

  std::size_t width_;
  std::size_t height_;
  std::size_t fit_window_;
  double pixel_pitch_;
  std::vector<double> mean_;
  std::vector<double> gauss_;
  std::vector<double> k1_;
  std::vector<double> k2_;
  std::vector<std::uint8_t> defined_;
};

/// Mean, Gaussian and principal curvatures from quadric coefficients.
struct SurfaceCurvature {
  double mean;
  double gaussian;
  double k1;
  double k2;
};
SurfaceCurvature curvature_from_quadric(double a, double b, double c, double d, double e);

/// fit_window must be odd and >= 5; pixel_pitch (mm/px) must be positive.
CurvatureMap curvature_map(const RangeImage& image, std::size_t fit_window = 7, double pixel_pitch = 1.0);

enum class ScoreMode {
  MeanAbs,       ///< |H|
  GaussianAbs,   ///< |K|
  PrincipalAbs,  ///< |k1|
};

std::optional<ScoreMode> parse_score_mode(std::string_view name);
std::string_view to_string(ScoreMode mode);

double corner_score(const CurvatureMap& curv, std::size_t row, std::size_t col, ScoreMode mode);

/// Eye search band: rows nose.row - upper .. nose.row - lower (inclusive),
/// every column.
struct EyeRoiSpec {
  std::size_t upper = 35;
  std::size_t lower = 5;
  double suppression_radius = 8.0;
  ScoreMode score = ScoreMode::MeanAbs;

  void validate() const;
};

struct EyeCorner {
  Landmark point;
  double score = 0.0;
};

/// Ordered so that first.point.col <= second.point.col.
struct EyeCorners {
  EyeCorner first;
  EyeCorner second;
};

/// Top two scores in the band under greedy non-maximum suppression: the
/// best-scoring defined pixel, then the best one at least
/// `suppression_radius` away from it. Only strictly positive scores count.
/// Throws EyeCornersNotFound when fewer than two picks exist.
EyeCorners detect_eye_corners(const RangeImage& image, const CurvatureMap& curv, const Landmark& nose,
                              const EyeRoiSpec& roi);

}  // namespace facepose
