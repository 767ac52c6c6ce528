// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facepose/landmarks.hpp"

namespace facepose {

struct ClassifierConfig {
  /// Tolerance, in pixel rows, on the vertical misalignment of the eyes.
  double epsilon = 2.0;

  void validate() const;
};

enum class PoseClass { RotatedX, RotatedY, RotatedZ, Frontal };

/// "rotated-x", "rotated-y", "rotated-z", "frontal".
std::string_view to_string(PoseClass pose);
std::optional<PoseClass> parse_pose_class(std::string_view name);

struct PoseInput {
  Landmark frontal_nose;
  Landmark rotated_nose;
  EyeCorners rotated_eyes;
  /// Carried through for reporting only; the decision never reads it.
  std::optional<EyeCorners> frontal_eyes;
};

struct PoseReport {
  PoseClass pose = PoseClass::Frontal;
  double eye_line_diff = 0.0;  ///< |row(first eye) - row(second eye)|
  double nose_dcol = 0.0;      ///< |frontal nose col - rotated nose col|
  double nose_drow = 0.0;      ///< |frontal nose row - rotated nose row|
  double epsilon = 0.0;
  std::vector<std::string> trace;
};

/// The decision rule on its own, evaluated in order:
///   eye_line_diff > epsilon            -> RotatedZ
///   deviation and nose_dcol >= drow    -> RotatedY
///   nose_drow > nose_dcol              -> RotatedX
///   otherwise                          -> Frontal
PoseClass decide_pose(double eye_line_diff, double nose_dcol, double nose_drow, double epsilon);

PoseReport classify_pose(const PoseInput& input, const ClassifierConfig& config = {});

}  // namespace facepose
