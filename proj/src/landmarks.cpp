// SPDX-License-Identifier: Apache-2.0

#include "facepose/landmarks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "facepose/errors.hpp"

namespace facepose {

Landmark detect_nose_tip(const RangeImage& image) {
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  std::size_t windows = 0;
  Landmark tip;
  for (std::size_t r = 1; r + 1 < h; ++r) {
    for (std::size_t c = 1; c + 1 < w; ++c) {
      double sum = 0.0;
      bool full = true;
      for (std::size_t rr = r - 1; rr <= r + 1 && full; ++rr) {
        for (std::size_t cc = c - 1; cc <= c + 1; ++cc) {
          if (!image.valid(rr, cc)) {
            full = false;
            break;
          }
          sum += image.depth(rr, cc);
        }
      }
      if (!full) continue;
      ++windows;
      worst = std::min(worst, sum);
      if (sum > best) {
        best = sum;
        tip = Landmark{r, c, image.depth(r, c)};
      }
    }
  }
  if (windows == 0) throw NoseNotFound("nose not found: no fully valid 3x3 window");
  if (windows > 1 && best == worst) throw NoseNotFound("nose not found: every 3x3 window has the same depth sum");
  return tip;
}

CurvatureMap::CurvatureMap(std::size_t width, std::size_t height, std::size_t fit_window, double pixel_pitch)
    : width_(width),
      height_(height),
      fit_window_(fit_window),
      pixel_pitch_(pixel_pitch),
      mean_(width * height, RangeImage::kInvalidDepth),
      gauss_(width * height, RangeImage::kInvalidDepth),
      k1_(width * height, RangeImage::kInvalidDepth),
      k2_(width * height, RangeImage::kInvalidDepth),
      defined_(width * height, 0) {}

std::size_t CurvatureMap::defined_count() const noexcept {
  return static_cast<std::size_t>(std::count(defined_.begin(), defined_.end(), std::uint8_t{1}));
}

void CurvatureMap::set(std::size_t row, std::size_t col, double mean, double gaussian, double k1, double k2) {
  const std::size_t i = idx(row, col);
  mean_[i] = mean;
  gauss_[i] = gaussian;
  k1_[i] = k1;
  k2_[i] = k2;
  defined_[i] = 1;
}

SurfaceCurvature curvature_from_quadric(double a, double b, double c, double d, double e) {
  const double g = 1.0 + d * d + e * e;
  const double mean = ((1.0 + e * e) * 2.0 * a - 2.0 * d * e * b + (1.0 + d * d) * 2.0 * c) / (2.0 * std::pow(g, 1.5));
  const double gaussian = (4.0 * a * c - b * b) / (g * g);
  const double disc = std::sqrt(std::max(mean * mean - gaussian, 0.0));
  return {mean, gaussian, mean + disc, mean - disc};
}

CurvatureMap curvature_map(const RangeImage& image, std::size_t fit_window, double pixel_pitch) {
  if (fit_window < 5 || fit_window % 2 == 0) {
    throw SpecError("curvature fit window must be odd and >= 5, got " + std::to_string(fit_window));
  }
  if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch)) throw SpecError("pixel pitch must be positive");

  const std::size_t h = image.height();
  const std::size_t w = image.width();
  CurvatureMap map(w, h, fit_window, pixel_pitch);
  const auto half = static_cast<long>(fit_window / 2);
  if (h < fit_window || w < fit_window) return map;

  // Every defined pixel sees a complete window on the same regular lattice, so
  // a single least-squares operator serves the whole image.
  const auto n = static_cast<Eigen::Index>(fit_window * fit_window);
  Eigen::MatrixXd design(n, 6);
  Eigen::Index k = 0;
  for (long dv = -half; dv <= half; ++dv) {
    for (long du = -half; du <= half; ++du, ++k) {
      const double u = static_cast<double>(du) * pixel_pitch;
      const double v = static_cast<double>(dv) * pixel_pitch;
      design.row(k) << u * u, u * v, v * v, u, v, 1.0;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 6) return map;
  const Eigen::MatrixXd solve = qr.solve(Eigen::MatrixXd::Identity(n, n));  // 6 x n

  // Summed-area table of invalid pixels for O(1) window checks.
  std::vector<long> holes((h + 1) * (w + 1), 0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      holes[(r + 1) * (w + 1) + c + 1] = holes[r * (w + 1) + c + 1] + holes[(r + 1) * (w + 1) + c] -
                                         holes[r * (w + 1) + c] + (image.valid(r, c) ? 0 : 1);
    }
  }
  const auto hole_count = [&](std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) {
    return holes[r1 * (w + 1) + c1] - holes[r0 * (w + 1) + c1] - holes[r1 * (w + 1) + c0] + holes[r0 * (w + 1) + c0];
  };

  Eigen::VectorXd window(n);
  const auto uhalf = static_cast<std::size_t>(half);
  for (std::size_t r = uhalf; r + uhalf < h; ++r) {
    for (std::size_t c = uhalf; c + uhalf < w; ++c) {
      if (hole_count(r - uhalf, c - uhalf, r + uhalf + 1, c + uhalf + 1) != 0) continue;
      // Centre-relative depths keep the fit independent of the depth offset.
      const double centre = image.depth(r, c);
      Eigen::Index i = 0;
      for (std::size_t rr = r - uhalf; rr <= r + uhalf; ++rr) {
        for (std::size_t cc = c - uhalf; cc <= c + uhalf; ++cc) {
          window[i++] = image.depth(rr, cc) - centre;
        }
      }
      const Eigen::Matrix<double, 5, 1> coef = solve.topRows<5>() * window;
      if (!coef.allFinite()) continue;
      const SurfaceCurvature s = curvature_from_quadric(coef[0], coef[1], coef[2], coef[3], coef[4]);
      map.set(r, c, s.mean, s.gaussian, s.k1, s.k2);
    }
  }
  return map;
}

std::optional<ScoreMode> parse_score_mode(std::string_view name) {
  if (name == "mean") return ScoreMode::MeanAbs;
  if (name == "gaussian") return ScoreMode::GaussianAbs;
  if (name == "principal") return ScoreMode::PrincipalAbs;
  return std::nullopt;
}

std::string_view to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::MeanAbs:
      return "mean";
    case ScoreMode::GaussianAbs:
      return "gaussian";
    case ScoreMode::PrincipalAbs:
      return "principal";
  }
  return "mean";
}

double corner_score(const CurvatureMap& curv, std::size_t row, std::size_t col, ScoreMode mode) {
  switch (mode) {
    case ScoreMode::MeanAbs:
      return std::abs(curv.mean(row, col));
    case ScoreMode::GaussianAbs:
      return std::abs(curv.gaussian(row, col));
    case ScoreMode::PrincipalAbs:
      return std::abs(curv.k1(row, col));
  }
  return 0.0;
}

void EyeRoiSpec::validate() const {
  if (lower > upper) throw SpecError("eye ROI lower offset exceeds upper offset");
  if (!(suppression_radius >= 0.0) || !std::isfinite(suppression_radius)) {
    throw SpecError("suppression radius must be a non-negative number");
  }
}

EyeCorners detect_eye_corners(const RangeImage& image, const CurvatureMap& curv, const Landmark& nose,
                              const EyeRoiSpec& roi) {
  roi.validate();
  if (curv.width() != image.width() || curv.height() != image.height()) {
    throw DimensionError("curvature map does not match the image");
  }
  if (nose.row < roi.lower) throw EyeCornersNotFound("eye corners not found: search band lies above the image");
  const std::size_t row_last = nose.row - roi.lower;
  const std::size_t row_first = nose.row >= roi.upper ? nose.row - roi.upper : 0;

  struct Pick {
    std::size_t row;
    std::size_t col;
    double score;
  };
  const auto best_pick = [&](const std::optional<Pick>& exclude) -> std::optional<Pick> {
    std::optional<Pick> best;
    const double r2 = roi.suppression_radius * roi.suppression_radius;
    for (std::size_t r = row_first; r <= row_last && r < image.height(); ++r) {
      for (std::size_t c = 0; c < image.width(); ++c) {
        if (!curv.defined(r, c) || !image.valid(r, c)) continue;
        if (exclude) {
          const double dr = static_cast<double>(r) - static_cast<double>(exclude->row);
          const double dc = static_cast<double>(c) - static_cast<double>(exclude->col);
          if (dr * dr + dc * dc < r2) continue;
        }
        const double s = corner_score(curv, r, c, roi.score);
        if (!(s > 0.0)) continue;
        if (!best || s > best->score) best = Pick{r, c, s};
      }
    }
    return best;
  };

  const auto top = best_pick(std::nullopt);
  if (!top) throw EyeCornersNotFound("eye corners not found: no curvature response in the search band");
  const auto next = best_pick(top);
  if (!next) throw EyeCornersNotFound("eye corners not found: only one curvature maximum in the search band");

  auto make = [&](const Pick& p) { return EyeCorner{Landmark{p.row, p.col, image.depth(p.row, p.col)}, p.score}; };
  EyeCorners out{make(*top), make(*next)};
  if (std::tie(out.second.point.col, out.second.point.row) < std::tie(out.first.point.col, out.first.point.row)) {
    std::swap(out.first, out.second);
  }
  return out;
}

}  // namespace facepose
