// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facepose/range_image.hpp"
#include "facepose/rangeio.hpp"

namespace facepose {

/// Ellipsoidal head dome centred on the world origin; depth is its height at
/// the apex.
struct DomeSpec {
  double semi_x = 56.0;
  double semi_y = 64.0;
  double depth = 30.0;
};

/// Positive Gaussian bump.
struct NoseSpec {
  double amplitude = 35.0;
  double width = 10.0;
  double center_x = 0.0;
  double center_y = 0.0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Two negative Gaussian pits.
struct EyeSpec {
  double depth = 14.0;
  double width = 6.0;
  std::array<Vec2, 2> centers{Vec2{-30.4, -27.2}, Vec2{30.4, -27.2}};
};

struct SyntheticFaceSpec {
  GridSpec grid;
  DomeSpec dome;
  NoseSpec nose;
  EyeSpec eyes;
  double noise_sigma = 0.0;  ///< mm, per sampled point
  std::uint64_t seed = 0;
  /// Lattice spacing of the sampled cloud in mm; 0 picks a third of the grid pitch.
  double sample_step = 0.0;
  /// Depth of the flat backdrop that fills cells the face does not cover.
  double backdrop_depth = -150.0;
  /// Rotations pivot this far behind the nose apex, along the view axis.
  double pivot_depth = 45.0;

  /// Throws SpecError on any broken invariant except the nose-maximum one,
  /// which generate_face checks on the sampled lattice.
  void validate() const;
  double step() const;
};

enum class Axis { X, Y, Z };

std::string_view to_string(Axis axis);
std::optional<Axis> parse_axis(std::string_view name);

struct RotationSpec {
  Axis axis = Axis::X;
  double degrees = 0.0;

  friend bool operator==(const RotationSpec&, const RotationSpec&) = default;
};

/// Noiseless face height at (x, y); nullopt outside the dome footprint.
std::optional<double> face_surface(const SyntheticFaceSpec& spec, double x, double y);

/// Dense cloud on a square lattice anchored at the nose centre. Deterministic
/// in (spec, seed). Throws SpecError when the features are laid out so that
/// the noiseless nose centre is not the highest sample.
PointCloud generate_face(const SyntheticFaceSpec& spec);

/// Noiseless nose apex and eye-pit centres on the surface.
Point3 nose_point(const SyntheticFaceSpec& spec);
std::array<Point3, 2> eye_points(const SyntheticFaceSpec& spec);
Point3 default_pivot(const SyntheticFaceSpec& spec);

/// max - min of the noiseless sampled surface.
double face_depth_range(const SyntheticFaceSpec& spec);

/// Row-major 3x3 rotation matrix (right-handed, angle in degrees).
std::array<double, 9> rotation_matrix(const RotationSpec& rot);
Point3 rotate_point(const Point3& p, const RotationSpec& rot, const Point3& pivot);
PointCloud rotate_cloud(const PointCloud& cloud, const RotationSpec& rot, const Point3& pivot);

/// Orthographic render onto spec.grid; uncovered cells take the backdrop depth.
RangeImage render_face(const PointCloud& cloud, const SyntheticFaceSpec& spec);

struct PixelLandmark {
  long row = 0;
  long col = 0;
  Point3 world;
};

struct TrueLandmarks {
  PixelLandmark nose;
  std::array<PixelLandmark, 2> eyes;
};

struct LabeledSample {
  std::size_t spec_index = 0;
  std::size_t rotation_index = 0;
  RotationSpec truth;
  RangeImage frontal;
  RangeImage rotated;
  TrueLandmarks frontal_truth;
  TrueLandmarks rotated_truth;
  bool usable = true;
  std::string problem;
};

/// Project noiseless landmarks through the grid, optionally after rotation.
TrueLandmarks true_landmarks(const SyntheticFaceSpec& spec, const RotationSpec& rot);

/// {+5,-5,+10,-10,+18,-18,+40,-40} about X, then Y, then Z.
std::vector<RotationSpec> default_sweep();
std::vector<RotationSpec> make_sweep(const std::vector<Axis>& axes, const std::vector<double>& degrees);

/// `count` subjects varied around `base`, deterministic in `seed`.
std::vector<SyntheticFaceSpec> subject_specs(std::size_t count, std::uint64_t seed,
                                             const SyntheticFaceSpec& base = {});

/// One sample per (spec, rotation), ordered spec-major. Frontal and rotated
/// scans draw independent noise. Samples whose face leaves the grid are
/// flagged unusable rather than dropped. `threads` = 0 uses the hardware count.
std::vector<LabeledSample> make_dataset(const std::vector<SyntheticFaceSpec>& specs,
                                        const std::vector<RotationSpec>& sweep, unsigned threads = 0);

}  // namespace facepose
