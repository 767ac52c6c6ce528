// SPDX-License-Identifier: Apache-2.0

#include "facepose/range_image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "facepose/errors.hpp"

namespace facepose {

RangeImage::RangeImage(std::size_t width, std::size_t height, std::vector<double> depth,
                       std::vector<std::uint8_t> valid)
    : width_(width), height_(height), depth_(std::move(depth)), valid_(std::move(valid)) {
  if (width_ < 3 || height_ < 3) {
    throw DimensionError("range image must be at least 3x3, got " + std::to_string(width_) + "x" +
                         std::to_string(height_));
  }
  if (depth_.size() != size() || valid_.size() != size()) {
    throw DimensionError("range image buffers do not match " + std::to_string(width_) + "x" +
                         std::to_string(height_));
  }
  for (std::size_t i = 0; i < depth_.size(); ++i) {
    if (valid_[i] != 0) {
      valid_[i] = 1;
      if (!std::isfinite(depth_[i])) {
        throw SpecError("non-finite depth at valid pixel " + std::to_string(i));
      }
    } else {
      depth_[i] = kInvalidDepth;
    }
  }
}

RangeImage::RangeImage(std::size_t width, std::size_t height, std::vector<double> depth)
    : RangeImage(width, height, std::move(depth), std::vector<std::uint8_t>(width * height, 1)) {}

std::size_t RangeImage::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool operator==(const RangeImage& a, const RangeImage& b) noexcept {
  if (a.width_ != b.width_ || a.height_ != b.height_ || a.valid_ != b.valid_) return false;
  for (std::size_t i = 0; i < a.depth_.size(); ++i) {
    if (a.valid_[i] != 0 &&
        std::bit_cast<std::uint64_t>(a.depth_[i]) != std::bit_cast<std::uint64_t>(b.depth_[i])) {
      return false;
    }
  }
  return true;
}

}  // namespace facepose
