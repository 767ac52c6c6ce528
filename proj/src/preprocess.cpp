// SPDX-License-Identifier: Apache-2.0

#include "facepose/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "facepose/errors.hpp"

namespace facepose {

void SmoothSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw SpecError("smoothing sigma must be positive");
  if (radius < 1) throw SpecError("smoothing kernel radius must be at least 1");
}

RangeImage crop_face(const RangeImage& image, const CropSpec& spec) {
  if (spec.row_begin >= spec.row_end || spec.col_begin >= spec.col_end || spec.row_end > image.height() ||
      spec.col_end > image.width()) {
    throw BoundsError("crop rows [" + std::to_string(spec.row_begin) + "," + std::to_string(spec.row_end) +
                      ") cols [" + std::to_string(spec.col_begin) + "," + std::to_string(spec.col_end) +
                      ") exceed a " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                      " image");
  }
  if (spec.rows() < 3 || spec.cols() < 3) throw BoundsError("crop must be at least 3x3");

  std::vector<double> depth;
  std::vector<std::uint8_t> valid;
  depth.reserve(spec.rows() * spec.cols());
  valid.reserve(spec.rows() * spec.cols());
  for (std::size_t r = spec.row_begin; r < spec.row_end; ++r) {
    for (std::size_t c = spec.col_begin; c < spec.col_end; ++c) {
      depth.push_back(image.depth(r, c));
      valid.push_back(image.valid(r, c) ? 1 : 0);
    }
  }
  return RangeImage(spec.cols(), spec.rows(), std::move(depth), std::move(valid));
}

std::size_t otsu_bin(double depth, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const double pos = std::floor((depth - lo) / (hi - lo) * static_cast<double>(kOtsuBins));
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(kOtsuBins - 1)));
}

OtsuResult otsu_threshold(const RangeImage& image) {
  const auto depths = image.depths();
  const auto mask = image.mask();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (mask[i] == 0) continue;
    lo = std::min(lo, depths[i]);
    hi = std::max(hi, depths[i]);
  }
  if (!std::isfinite(lo)) throw DimensionError("otsu threshold needs at least one valid pixel");
  if (lo == hi) return OtsuResult{lo, 0, true, image};

  std::array<std::int64_t, kOtsuBins> hist{};
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (mask[i] != 0) ++hist[otsu_bin(depths[i], lo, hi)];
  }
  std::int64_t total = 0;
  std::int64_t total_sum = 0;
  for (std::size_t b = 0; b < kOtsuBins; ++b) {
    total += hist[b];
    total_sum += static_cast<std::int64_t>(b) * hist[b];
  }

  // Between-class variance up to the constant factor 1/N^2:
  //   (S0*n1 - S1*n0)^2 / (n0*n1)
  // with n the class counts and S the class sums of bin indices.
  std::int64_t n0 = 0;
  std::int64_t s0 = 0;
  double best = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t t = 0; t + 1 < kOtsuBins; ++t) {
    n0 += hist[t];
    s0 += static_cast<std::int64_t>(t) * hist[t];
    const std::int64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const std::int64_t s1 = total_sum - s0;
    const double diff = static_cast<double>(s0 * n1 - s1 * n0);
    const double between = diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }

  // Report the midpoint of the gap between the classes, so that
  // "depth <= threshold" selects exactly the background bins.
  double bg_max = -std::numeric_limits<double>::infinity();
  double fg_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (mask[i] == 0) continue;
    if (otsu_bin(depths[i], lo, hi) <= best_bin) {
      bg_max = std::max(bg_max, depths[i]);
    } else {
      fg_min = std::min(fg_min, depths[i]);
    }
  }
  double threshold = bg_max + (fg_min - bg_max) / 2.0;
  if (!(threshold < fg_min)) threshold = bg_max;

  std::vector<double> out_depth(depths.begin(), depths.end());
  std::vector<std::uint8_t> out_valid(mask.begin(), mask.end());
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (out_valid[i] != 0 && out_depth[i] <= threshold) out_valid[i] = 0;
  }
  return OtsuResult{threshold, best_bin, false,
                    RangeImage(image.width(), image.height(), std::move(out_depth), std::move(out_valid))};
}

std::vector<double> gaussian_kernel(const SmoothSpec& spec) {
  spec.validate();
  const auto r = static_cast<long>(spec.radius);
  std::vector<double> weights(2 * spec.radius + 1);
  double sum = 0.0;
  for (long k = -r; k <= r; ++k) {
    const double w = std::exp(-static_cast<double>(k * k) / (2.0 * spec.sigma * spec.sigma));
    weights[static_cast<std::size_t>(k + r)] = w;
    sum += w;
  }
  for (double& w : weights) w /= sum;
  return weights;
}

RangeImage gaussian_smooth(const RangeImage& image, const SmoothSpec& spec) {
  const std::vector<double> kernel = gaussian_kernel(spec);
  const auto r = static_cast<long>(spec.radius);
  const auto h = static_cast<long>(image.height());
  const auto w = static_cast<long>(image.width());

  std::vector<double> out(image.size(), RangeImage::kInvalidDepth);
  std::vector<std::uint8_t> valid(image.mask().begin(), image.mask().end());
  for (long row = 0; row < h; ++row) {
    for (long col = 0; col < w; ++col) {
      if (!image.valid(row, col)) continue;
      // Accumulate deviations from the centre sample: a constant window then
      // reproduces its value exactly.
      const double centre = image.depth(row, col);
      double num = 0.0;
      double den = 0.0;
      double lo = centre;
      double hi = centre;
      for (long dr = -r; dr <= r; ++dr) {
        const long rr = row + dr;
        if (rr < 0 || rr >= h) continue;
        const double wr = kernel[static_cast<std::size_t>(dr + r)];
        for (long dc = -r; dc <= r; ++dc) {
          const long cc = col + dc;
          if (cc < 0 || cc >= w || !image.valid(rr, cc)) continue;
          const double d = image.depth(rr, cc);
          const double wt = wr * kernel[static_cast<std::size_t>(dc + r)];
          num += wt * (d - centre);
          den += wt;
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      }
      out[image.index(row, col)] = std::clamp(centre + num / den, lo, hi);
    }
  }
  return RangeImage(image.width(), image.height(), std::move(out), std::move(valid));
}

}  // namespace facepose
