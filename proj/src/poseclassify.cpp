// SPDX-License-Identifier: Apache-2.0

#include "facepose/poseclassify.hpp"

#include <cmath>
#include <sstream>

#include "facepose/errors.hpp"

namespace facepose {

namespace {

double abs_diff(std::size_t a, std::size_t b) {
  return a > b ? static_cast<double>(a - b) : static_cast<double>(b - a);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void ClassifierConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw SpecError("epsilon must be a non-negative number");
}

std::string_view to_string(PoseClass pose) {
  switch (pose) {
    case PoseClass::RotatedX:
      return "rotated-x";
    case PoseClass::RotatedY:
      return "rotated-y";
    case PoseClass::RotatedZ:
      return "rotated-z";
    case PoseClass::Frontal:
      return "frontal";
  }
  return "frontal";
}

std::optional<PoseClass> parse_pose_class(std::string_view name) {
  for (PoseClass p : {PoseClass::RotatedX, PoseClass::RotatedY, PoseClass::RotatedZ, PoseClass::Frontal}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

PoseClass decide_pose(double eye_line_diff, double nose_dcol, double nose_drow, double epsilon) {
  if (eye_line_diff > epsilon) return PoseClass::RotatedZ;
  const bool moved = nose_dcol != 0.0 || nose_drow != 0.0;
  if (moved && nose_dcol >= nose_drow) return PoseClass::RotatedY;
  if (nose_drow > nose_dcol) return PoseClass::RotatedX;
  return PoseClass::Frontal;
}

PoseReport classify_pose(const PoseInput& input, const ClassifierConfig& config) {
  config.validate();
  PoseReport report;
  report.epsilon = config.epsilon;
  report.eye_line_diff = abs_diff(input.rotated_eyes.first.point.row, input.rotated_eyes.second.point.row);
  report.nose_dcol = abs_diff(input.frontal_nose.col, input.rotated_nose.col);
  report.nose_drow = abs_diff(input.frontal_nose.row, input.rotated_nose.row);

  auto& trace = report.trace;
  const std::string diff = fmt(report.eye_line_diff);
  const std::string eps = fmt(report.epsilon);
  const std::string dcol = fmt(report.nose_dcol);
  const std::string drow = fmt(report.nose_drow);

  if (report.eye_line_diff > report.epsilon) {
    trace.push_back("eye-line diff " + diff + " > epsilon " + eps + ": eyes off one horizontal line");
    report.pose = PoseClass::RotatedZ;
  } else {
    trace.push_back("eye-line diff " + diff + " <= epsilon " + eps + ": eyes on one horizontal line");
    const bool moved = report.nose_dcol != 0.0 || report.nose_drow != 0.0;
    if (moved && report.nose_dcol >= report.nose_drow) {
      trace.push_back("nose deviation col " + dcol + " >= row " + drow + ": horizontal displacement dominates");
      report.pose = PoseClass::RotatedY;
    } else if (report.nose_drow > report.nose_dcol) {
      trace.push_back("nose deviation row " + drow + " > col " + dcol + ": vertical displacement dominates");
      report.pose = PoseClass::RotatedX;
    } else {
      trace.push_back("nose deviation col " + dcol + ", row " + drow + ": nose did not move");
      report.pose = PoseClass::Frontal;
    }
  }
  trace.push_back("verdict: " + std::string(to_string(report.pose)));
  return report;
}

}  // namespace facepose
