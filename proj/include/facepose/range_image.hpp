// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace facepose {

/// Rectangular depth grid with a validity mask.
///
/// Depth is in millimetres with the "larger is closer to the sensor"
/// polarity. Invalid pixels hold a quiet NaN so that any numeric kernel that
/// forgets to consult the mask poisons its output instead of silently reading
/// a plausible value. Instances are immutable once constructed.
class RangeImage {
 public:
  static constexpr double kInvalidDepth = std::numeric_limits<double>::quiet_NaN();

  /// Throws DimensionError on width/height < 3 or mismatched buffer sizes, and
  /// SpecError when a valid pixel carries a non-finite depth.
  RangeImage(std::size_t width, std::size_t height, std::vector<double> depth,
             std::vector<std::uint8_t> valid);

  /// Fully valid image.
  RangeImage(std::size_t width, std::size_t height, std::vector<double> depth);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return width_ * height_; }

  std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * width_ + col; }
  bool in_bounds(long row, long col) const noexcept {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < height_ &&
           static_cast<std::size_t>(col) < width_;
  }

  double depth(std::size_t row, std::size_t col) const noexcept { return depth_[index(row, col)]; }
  bool valid(std::size_t row, std::size_t col) const noexcept { return valid_[index(row, col)] != 0; }

  std::span<const double> depths() const noexcept { return depth_; }
  std::span<const std::uint8_t> mask() const noexcept { return valid_; }

  std::size_t valid_count() const noexcept;

  /// Pixel-wise equality over the mask and the depths of valid pixels.
  /// Valid depths are compared bit-for-bit; invalid pixels carry no depth.
  friend bool operator==(const RangeImage& a, const RangeImage& b) noexcept;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> depth_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace facepose
