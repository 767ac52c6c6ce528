// SPDX-License-Identifier: Apache-2.0

#include "facepose/synthface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "facepose/errors.hpp"
#include "parallel.hpp"

namespace facepose {

namespace {

double gaussian_bump(double x, double y, double cx, double cy, double width) {
  const double dx = x - cx;
  const double dy = y - cy;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct LatticeRange {
  long i_lo, i_hi, j_lo, j_hi;
};

LatticeRange lattice_range(const SyntheticFaceSpec& spec) {
  const double s = spec.step();
  return {static_cast<long>(std::ceil((-spec.dome.semi_x - spec.nose.center_x) / s)),
          static_cast<long>(std::floor((spec.dome.semi_x - spec.nose.center_x) / s)),
          static_cast<long>(std::ceil((-spec.dome.semi_y - spec.nose.center_y) / s)),
          static_cast<long>(std::floor((spec.dome.semi_y - spec.nose.center_y) / s))};
}

template <typename Fn>
void for_each_lattice_point(const SyntheticFaceSpec& spec, Fn&& fn) {
  const double s = spec.step();
  const LatticeRange range = lattice_range(spec);
  for (long j = range.j_lo; j <= range.j_hi; ++j) {
    const double y = spec.nose.center_y + static_cast<double>(j) * s;
    for (long i = range.i_lo; i <= range.i_hi; ++i) {
      const double x = spec.nose.center_x + static_cast<double>(i) * s;
      if (const auto z = face_surface(spec, x, y)) fn(i, j, Point3{x, y, *z});
    }
  }
}

PixelLandmark to_pixel(const GridSpec& grid, const Point3& p) {
  const auto cell = grid.cell_of(p.x, p.y);
  return PixelLandmark{cell.row, cell.col, p};
}

RangeImage backdrop_image(const SyntheticFaceSpec& spec) {
  return RangeImage(spec.grid.width, spec.grid.height,
                    std::vector<double>(spec.grid.width * spec.grid.height, spec.backdrop_depth));
}

}  // namespace

void SyntheticFaceSpec::validate() const {
  grid.validate();
  if (!(dome.semi_x > 0.0) || !(dome.semi_y > 0.0) || !(dome.depth > 0.0)) {
    throw SpecError("dome semi-axes and depth must be positive");
  }
  if (!(nose.amplitude > 0.0)) throw SpecError("nose amplitude must be positive");
  if (!(nose.width > 0.0)) throw SpecError("nose width must be positive");
  if (!(eyes.depth > 0.0)) throw SpecError("eye pit depth must be positive");
  if (!(eyes.width > 0.0)) throw SpecError("eye pit width must be positive");
  for (const Vec2& c : eyes.centers) {
    if (!(c.y < nose.center_y)) throw SpecError("eye centres must lie above the nose centre (smaller y)");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw SpecError("noise sigma must be >= 0");
  if (!(sample_step >= 0.0) || !std::isfinite(sample_step)) throw SpecError("sample step must be >= 0");
  if (!(pivot_depth >= 0.0) || !std::isfinite(pivot_depth)) throw SpecError("pivot depth must be >= 0");
  if (!std::isfinite(backdrop_depth)) throw SpecError("backdrop depth must be finite");
}

double SyntheticFaceSpec::step() const {
  if (sample_step > 0.0) return sample_step;
  return std::min(grid.pitch_x(), grid.pitch_y()) / 3.0;
}

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X:
      return "X";
    case Axis::Y:
      return "Y";
    case Axis::Z:
      return "Z";
  }
  return "X";
}

std::optional<Axis> parse_axis(std::string_view name) {
  if (name == "X" || name == "x") return Axis::X;
  if (name == "Y" || name == "y") return Axis::Y;
  if (name == "Z" || name == "z") return Axis::Z;
  return std::nullopt;
}

std::optional<double> face_surface(const SyntheticFaceSpec& spec, double x, double y) {
  const double u = x / spec.dome.semi_x;
  const double v = y / spec.dome.semi_y;
  const double rho2 = u * u + v * v;
  if (rho2 >= 1.0) return std::nullopt;
  double z = spec.dome.depth * std::sqrt(1.0 - rho2);
  z += spec.nose.amplitude * gaussian_bump(x, y, spec.nose.center_x, spec.nose.center_y, spec.nose.width);
  for (const Vec2& c : spec.eyes.centers) {
    z -= spec.eyes.depth * gaussian_bump(x, y, c.x, c.y, spec.eyes.width);
  }
  return z;
}

PointCloud generate_face(const SyntheticFaceSpec& spec) {
  spec.validate();
  PointCloud cloud;
  double apex = -std::numeric_limits<double>::infinity();
  double rival = -std::numeric_limits<double>::infinity();
  for_each_lattice_point(spec, [&](long i, long j, const Point3& p) {
    if (i == 0 && j == 0) {
      apex = p.z;
    } else {
      rival = std::max(rival, p.z);
    }
    cloud.points.push_back(p);
  });
  if (!(apex > rival)) {
    throw SpecError("face features leave the nose centre below some other point of the surface");
  }
  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Point3& p : cloud.points) p.z += noise(rng);
  }
  return cloud;
}

Point3 nose_point(const SyntheticFaceSpec& spec) {
  const auto z = face_surface(spec, spec.nose.center_x, spec.nose.center_y);
  if (!z) throw SpecError("nose centre lies outside the dome");
  return {spec.nose.center_x, spec.nose.center_y, *z};
}

std::array<Point3, 2> eye_points(const SyntheticFaceSpec& spec) {
  std::array<Point3, 2> out;
  for (std::size_t k = 0; k < 2; ++k) {
    const Vec2& c = spec.eyes.centers[k];
    const auto z = face_surface(spec, c.x, c.y);
    if (!z) throw SpecError("eye centre lies outside the dome");
    out[k] = {c.x, c.y, *z};
  }
  return out;
}

Point3 default_pivot(const SyntheticFaceSpec& spec) {
  Point3 p = nose_point(spec);
  p.z -= spec.pivot_depth;
  return p;
}

double face_depth_range(const SyntheticFaceSpec& spec) {
  spec.validate();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for_each_lattice_point(spec, [&](long, long, const Point3& p) {
    lo = std::min(lo, p.z);
    hi = std::max(hi, p.z);
  });
  return hi - lo;
}

std::array<double, 9> rotation_matrix(const RotationSpec& rot) {
  const double t = rot.degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  switch (rot.axis) {
    case Axis::X:
      return {1, 0, 0, 0, c, -s, 0, s, c};
    case Axis::Y:
      return {c, 0, s, 0, 1, 0, -s, 0, c};
    case Axis::Z:
      return {c, -s, 0, s, c, 0, 0, 0, 1};
  }
  return {1, 0, 0, 0, 1, 0, 0, 0, 1};
}

Point3 rotate_point(const Point3& p, const RotationSpec& rot, const Point3& pivot) {
  if (rot.degrees == 0.0) return p;
  const auto m = rotation_matrix(rot);
  const double x = p.x - pivot.x;
  const double y = p.y - pivot.y;
  const double z = p.z - pivot.z;
  return {m[0] * x + m[1] * y + m[2] * z + pivot.x, m[3] * x + m[4] * y + m[5] * z + pivot.y,
          m[6] * x + m[7] * y + m[8] * z + pivot.z};
}

PointCloud rotate_cloud(const PointCloud& cloud, const RotationSpec& rot, const Point3& pivot) {
  if (!std::isfinite(rot.degrees)) throw SpecError("rotation angle must be finite");
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Point3& p : cloud.points) out.points.push_back(rotate_point(p, rot, pivot));
  return out;
}

RangeImage render_face(const PointCloud& cloud, const SyntheticFaceSpec& spec) {
  const RangeImage face = project_to_range(cloud, spec.grid);
  std::vector<double> depth(face.depths().begin(), face.depths().end());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (face.mask()[i] == 0) depth[i] = spec.backdrop_depth;
  }
  return RangeImage(face.width(), face.height(), std::move(depth));
}

TrueLandmarks true_landmarks(const SyntheticFaceSpec& spec, const RotationSpec& rot) {
  const Point3 pivot = default_pivot(spec);
  TrueLandmarks out;
  out.nose = to_pixel(spec.grid, rotate_point(nose_point(spec), rot, pivot));
  const auto eyes = eye_points(spec);
  for (std::size_t k = 0; k < 2; ++k) out.eyes[k] = to_pixel(spec.grid, rotate_point(eyes[k], rot, pivot));
  return out;
}

std::vector<RotationSpec> make_sweep(const std::vector<Axis>& axes, const std::vector<double>& degrees) {
  std::vector<RotationSpec> sweep;
  for (Axis axis : axes) {
    for (double d : degrees) sweep.push_back({axis, d});
  }
  return sweep;
}

std::vector<RotationSpec> default_sweep() {
  return make_sweep({Axis::X, Axis::Y, Axis::Z}, {5, -5, 10, -10, 18, -18, 40, -40});
}

std::vector<SyntheticFaceSpec> subject_specs(std::size_t count, std::uint64_t seed, const SyntheticFaceSpec& base) {
  base.validate();
  std::mt19937_64 rng(seed);
  auto jitter = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<SyntheticFaceSpec> specs;
  specs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticFaceSpec s = base;
    s.dome.semi_x *= jitter(0.94, 1.06);
    s.dome.semi_y *= jitter(0.94, 1.06);
    s.dome.depth *= jitter(0.9, 1.1);
    s.nose.amplitude *= jitter(0.9, 1.1);
    s.nose.width *= jitter(0.9, 1.1);
    s.eyes.depth *= jitter(0.85, 1.15);
    s.eyes.width *= jitter(0.9, 1.1);
    // Keep every subject left-right symmetric.
    const double spread = jitter(0.95, 1.05);
    const double lift = jitter(-1.6, 1.6);
    for (Vec2& c : s.eyes.centers) {
      c.x = base.nose.center_x + (c.x - base.nose.center_x) * spread;
      c.y += lift;
    }
    s.seed = rng();
    specs.push_back(s);
  }
  return specs;
}

std::vector<LabeledSample> make_dataset(const std::vector<SyntheticFaceSpec>& specs,
                                        const std::vector<RotationSpec>& sweep, unsigned threads) {
  if (specs.empty()) throw SpecError("dataset needs at least one face spec");
  if (sweep.empty()) throw SpecError("dataset needs at least one rotation");
  for (const auto& s : specs) s.validate();

  struct Frontal {
    std::optional<RangeImage> image;
    std::string problem;
  };
  std::vector<Frontal> frontals(specs.size());
  detail::parallel_for(specs.size(), threads, [&](std::size_t i) {
    SyntheticFaceSpec scan = specs[i];
    scan.seed = mix_seed(specs[i].seed, 0);
    try {
      frontals[i].image = render_face(generate_face(scan), scan);
    } catch (const EmptyProjectionError& e) {
      frontals[i].problem = std::string("frontal render: ") + e.what();
    }
  });

  const std::size_t per_spec = sweep.size();
  std::vector<std::optional<LabeledSample>> slots(specs.size() * per_spec);
  detail::parallel_for(slots.size(), threads, [&](std::size_t n) {
    const std::size_t i = n / per_spec;
    const std::size_t k = n % per_spec;
    const SyntheticFaceSpec& spec = specs[i];
    const RotationSpec& rot = sweep[k];

    std::string problem = frontals[i].problem;
    std::optional<RangeImage> rotated;
    if (problem.empty()) {
      SyntheticFaceSpec scan = spec;
      scan.seed = mix_seed(spec.seed, k + 1);
      try {
        rotated = render_face(rotate_cloud(generate_face(scan), rot, default_pivot(spec)), scan);
      } catch (const EmptyProjectionError& e) {
        problem = std::string("rotated render: ") + e.what();
      }
    }
    const TrueLandmarks frontal_truth = true_landmarks(spec, RotationSpec{rot.axis, 0.0});
    const TrueLandmarks rotated_truth = true_landmarks(spec, rot);
    if (problem.empty()) {
      for (const TrueLandmarks* t : {&frontal_truth, &rotated_truth}) {
        for (const PixelLandmark* p : {&t->nose, &t->eyes[0], &t->eyes[1]}) {
          if (!spec.grid.contains({p->row, p->col})) problem = "true landmark projects outside the grid";
        }
      }
    }
    slots[n].emplace(LabeledSample{i, k, rot, frontals[i].image.value_or(backdrop_image(spec)),
                                   rotated.value_or(backdrop_image(spec)), frontal_truth, rotated_truth,
                                   problem.empty(), problem});
  });

  std::vector<LabeledSample> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace facepose
