// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "facepose/range_image.hpp"

namespace facepose {

/// Half-open pixel window [row_begin, row_end) x [col_begin, col_end).
struct CropSpec {
  std::size_t row_begin = 15;
  std::size_t row_end = 85;
  std::size_t col_begin = 15;
  std::size_t col_end = 85;

  std::size_t rows() const { return row_end - row_begin; }
  std::size_t cols() const { return col_end - col_begin; }
};

struct SmoothSpec {
  double sigma = 1.5;
  std::size_t radius = 3;

  /// Throws SpecError unless sigma > 0 and radius >= 1.
  void validate() const;
};

/// Throws BoundsError when the window leaves the image or is smaller than 3x3.
RangeImage crop_face(const RangeImage& image, const CropSpec& spec);

struct OtsuResult {
  double threshold = 0.0;
  /// Index of the last histogram bin assigned to the background class.
  std::size_t bin = 0;
  /// All valid depths were equal: threshold is that value and nothing is masked.
  bool degenerate = false;
  RangeImage masked;
};

constexpr std::size_t kOtsuBins = 256;

/// Histogram bin (0..255) of `depth` over the valid range [lo, hi].
std::size_t otsu_bin(double depth, double lo, double hi);

/// Single-level Otsu over a 256-bin histogram of valid depths (first maximum
/// of the between-class variance wins). The threshold is the midpoint between
/// the deepest background pixel and the shallowest foreground pixel; pixels at
/// or below it are invalidated. Throws DimensionError when the image has no
/// valid pixel.
OtsuResult otsu_threshold(const RangeImage& image);

/// Normalized 1-D Gaussian weights for offsets -radius..radius.
std::vector<double> gaussian_kernel(const SmoothSpec& spec);

/// Normalized convolution: every valid output pixel is the kernel-weighted
/// mean of the valid pixels in its window. Invalid pixels stay invalid and
/// out-of-image samples count as invalid.
RangeImage gaussian_smooth(const RangeImage& image, const SmoothSpec& spec);

}  // namespace facepose
