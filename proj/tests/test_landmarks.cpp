// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "facepose/errors.hpp"
#include "facepose/landmarks.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace facepose {
namespace {

RangeImage sample(std::size_t w, std::size_t h, const std::function<double(double, double)>& f) {
  std::vector<double> d(w * h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) d[r * w + c] = f(static_cast<double>(r), static_cast<double>(c));
  return RangeImage(w, h, d);
}

double bump(double r, double c, double r0, double c0, double sigma) {
  return std::exp(-((r - r0) * (r - r0) + (c - c0) * (c - c0)) / (2.0 * sigma * sigma));
}

RangeImage map_depths(const RangeImage& img, const std::function<double(double)>& f) {
  std::vector<double> d(img.depths().begin(), img.depths().end());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (img.mask()[i]) d[i] = f(d[i]);
  return RangeImage(img.width(), img.height(), d, std::vector<std::uint8_t>(img.mask().begin(), img.mask().end()));
}

TEST(NoseTip, SingleBump) {
  const RangeImage img = sample(61, 41, [](double r, double c) { return 20.0 * bump(r, c, 20, 30, 4); });
  const Landmark n = detect_nose_tip(img);
  EXPECT_EQ(n.row, 20u);
  EXPECT_EQ(n.col, 30u);
}

TEST(NoseTip, RowMajorTieBreak) {
  const RangeImage img = sample(41, 41, [](double r, double c) {
    return 20.0 * bump(r, c, 10, 10, 3) + 20.0 * bump(r, c, 30, 30, 3);
  });
  // Force the two windows to tie bit for bit.
  std::vector<double> d(img.depths().begin(), img.depths().end());
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) d[(30 + dr) * 41 + 30 + dc] = d[(10 + dr) * 41 + 10 + dc];
  const Landmark n = detect_nose_tip(RangeImage(41, 41, d));
  EXPECT_EQ(n.row, 10u);
  EXPECT_EQ(n.col, 10u);
}

TEST(NoseTip, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const RangeImage img = test::random_masked_grid(rng, 60, 60, 0.1);
    const Landmark got = detect_nose_tip(img);
    const Landmark want = test::brute_force_nose(img);
    ASSERT_EQ(got.row, want.row) << "trial " << trial;
    ASSERT_EQ(got.col, want.col) << "trial " << trial;
  }
}

TEST(NoseTip, InvariantUnderShiftAndScale) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const RangeImage img = test::random_masked_grid(rng, 30, 25, 0.1, 0.0, 100.0);
    const Landmark base = detect_nose_tip(img);
    // Powers of two keep the window sums exact.
    const Landmark shifted = detect_nose_tip(map_depths(img, [](double z) { return z + 256.0; }));
    const Landmark scaled = detect_nose_tip(map_depths(img, [](double z) { return z * 4.0; }));
    EXPECT_EQ(shifted.row, base.row);
    EXPECT_EQ(shifted.col, base.col);
    EXPECT_EQ(scaled.row, base.row);
    EXPECT_EQ(scaled.col, base.col);
  }
}

TEST(NoseTip, NotFound) {
  EXPECT_THROW(detect_nose_tip(RangeImage(10, 10, std::vector<double>(100, 3.0))), NoseNotFound);
  std::vector<std::uint8_t> m(25, 1);
  for (std::size_t i = 0; i < 25; i += 2) m[i] = 0;  // checkerboard: no full window
  EXPECT_THROW(detect_nose_tip(RangeImage(5, 5, std::vector<double>(25, 1.0), m)), NoseNotFound);
  try {
    detect_nose_tip(RangeImage(10, 10, std::vector<double>(100, 3.0)));
  } catch (const NoseNotFound& e) {
    EXPECT_NE(std::string(e.what()).find("nose not found"), std::string::npos);
  }
}

TEST(Curvature, PlaneIsFlat) {
  const double pitch = 0.7;
  const RangeImage img = sample(30, 20, [&](double r, double c) { return 0.3 * c * pitch + 0.1 * r * pitch; });
  const CurvatureMap m = curvature_map(img, 7, pitch);
  ASSERT_GT(m.defined_count(), 0u);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 30; ++c) {
      if (!m.defined(r, c)) continue;
      ASSERT_LE(std::abs(m.mean(r, c)), 1e-9);
      ASSERT_LE(std::abs(m.gaussian(r, c)), 1e-9);
    }
}

TEST(Curvature, ParaboloidApex) {
  const double pitch = 0.05;
  const RangeImage img = sample(41, 41, [&](double r, double c) {
    const double u = (c - 20) * pitch, v = (r - 20) * pitch;
    return -(u * u + v * v) / 2.0;
  });
  const CurvatureMap m = curvature_map(img, 7, pitch);
  ASSERT_TRUE(m.defined(20, 20));
  EXPECT_NEAR(std::abs(m.mean(20, 20)), 1.0, 0.01);
  EXPECT_NEAR(m.gaussian(20, 20), 1.0, 0.01);
}

TEST(Curvature, SphereGaussianCurvature) {
  const double R = 10.0, pitch = 0.2;
  const RangeImage img = sample(61, 61, [&](double r, double c) {
    const double u = (c - 30) * pitch, v = (r - 30) * pitch;
    return std::sqrt(R * R - u * u - v * v);
  });
  const CurvatureMap m = curvature_map(img, 7, pitch);
  ASSERT_GT(m.defined_count(), 2000u);
  for (std::size_t r = 0; r < 61; ++r)
    for (std::size_t c = 0; c < 61; ++c)
      if (m.defined(r, c)) ASSERT_NEAR(m.gaussian(r, c), 0.01, 0.0002) << r << "," << c;
}

TEST(Curvature, WindowValidityAndErrors) {
  std::vector<std::uint8_t> mask(400, 1);
  mask[10 * 20 + 10] = 0;
  const RangeImage img(20, 20, std::vector<double>(400, 1.0), mask);
  const CurvatureMap m = curvature_map(img, 5, 1.0);
  EXPECT_FALSE(m.defined(0, 0));     // window leaves the image
  EXPECT_FALSE(m.defined(12, 12));   // window covers the hole
  EXPECT_TRUE(m.defined(3, 3));
  EXPECT_THROW(curvature_map(img, 6, 1.0), SpecError);
  EXPECT_THROW(curvature_map(img, 3, 1.0), SpecError);
  EXPECT_THROW(curvature_map(img, 7, 0.0), SpecError);
}

TEST(Curvature, DepthTranslationInvariant) {
  std::mt19937_64 rng(41);
  const RangeImage img = test::random_grid(rng, 25, 25, -5.0, 5.0);
  const CurvatureMap a = curvature_map(img, 7, 1.3);
  const CurvatureMap b = curvature_map(map_depths(img, [](double z) { return z + 1000.0; }), 7, 1.3);
  for (std::size_t r = 0; r < 25; ++r)
    for (std::size_t c = 0; c < 25; ++c) {
      ASSERT_EQ(a.defined(r, c), b.defined(r, c));
      if (!a.defined(r, c)) continue;
      ASSERT_NEAR(a.mean(r, c), b.mean(r, c), 1e-9);
      ASSERT_NEAR(a.gaussian(r, c), b.gaussian(r, c), 1e-9);
    }
}

TEST(Curvature, MirrorSymmetric) {
  std::mt19937_64 rng(43);
  const RangeImage img = test::random_masked_grid(rng, 24, 19, 0.02, -5.0, 5.0);
  std::vector<double> d(img.size());
  std::vector<std::uint8_t> m(img.size());
  for (std::size_t r = 0; r < 19; ++r)
    for (std::size_t c = 0; c < 24; ++c) {
      d[r * 24 + c] = img.depths()[r * 24 + (23 - c)];
      m[r * 24 + c] = img.mask()[r * 24 + (23 - c)];
    }
  const CurvatureMap a = curvature_map(img, 5, 1.0);
  const CurvatureMap b = curvature_map(RangeImage(24, 19, d, m), 5, 1.0);
  for (std::size_t r = 0; r < 19; ++r)
    for (std::size_t c = 0; c < 24; ++c) {
      ASSERT_EQ(a.defined(r, c), b.defined(r, 23 - c));
      if (!a.defined(r, c)) continue;
      ASSERT_NEAR(a.mean(r, c), b.mean(r, 23 - c), 1e-9);
      ASSERT_NEAR(a.gaussian(r, c), b.gaussian(r, 23 - c), 1e-9);
    }
}

TEST(Curvature, PrincipalCurvaturesFromQuadric) {
  // z = u^2/2 + v^2: principal curvatures 1 and 2 at the origin.
  const SurfaceCurvature s = curvature_from_quadric(0.5, 0.0, 1.0, 0.0, 0.0);
  EXPECT_NEAR(s.mean, 1.5, 1e-12);
  EXPECT_NEAR(s.gaussian, 2.0, 1e-12);
  EXPECT_NEAR(s.k1, 2.0, 1e-12);
  EXPECT_NEAR(s.k2, 1.0, 1e-12);
}

TEST(EyeCorners, TwoDentsOnAPlane) {
  const RangeImage img = sample(60, 50, [](double r, double c) {
    return 5.0 - 4.0 * bump(r, c, 15, 18, 1.5) - 4.0 * bump(r, c, 15, 42, 1.5);
  });
  const CurvatureMap curv = curvature_map(img);
  const EyeCorners e = detect_eye_corners(img, curv, Landmark{40, 30, 0.0}, EyeRoiSpec{});
  EXPECT_EQ(e.first.point.row, 15u);
  EXPECT_EQ(e.first.point.col, 18u);
  EXPECT_EQ(e.second.point.row, 15u);
  EXPECT_EQ(e.second.point.col, 42u);
  EXPECT_GT(e.first.score, 0.0);
}

TEST(EyeCorners, FaceWithPits) {
  const RangeImage img = sample(60, 56, [](double r, double c) {
    const double dome = 30.0 - 0.01 * ((r - 28) * (r - 28) + (c - 30) * (c - 30));
    return dome + 25.0 * bump(r, c, 38, 30, 3.0) - 8.0 * bump(r, c, 18, 20, 2.5) - 8.0 * bump(r, c, 18, 40, 2.5);
  });
  const Landmark nose = detect_nose_tip(img);
  EXPECT_EQ(nose.row, 38u);
  EXPECT_EQ(nose.col, 30u);
  const EyeCorners e = detect_eye_corners(img, curvature_map(img), nose, EyeRoiSpec{});
  EXPECT_LE(std::abs(static_cast<long>(e.first.point.row) - 18), 2);
  EXPECT_LE(std::abs(static_cast<long>(e.first.point.col) - 20), 2);
  EXPECT_LE(std::abs(static_cast<long>(e.second.point.row) - 18), 2);
  EXPECT_LE(std::abs(static_cast<long>(e.second.point.col) - 40), 2);
}

TEST(EyeCorners, PicksDominateOutsideSuppressionDisks) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const RangeImage img = test::random_grid(rng, 40, 50, 0.0, 3.0);
    const CurvatureMap curv = curvature_map(img);
    const Landmark nose{45, 20, 0.0};
    EyeRoiSpec roi;
    roi.score = static_cast<ScoreMode>(trial % 3);
    const EyeCorners e = detect_eye_corners(img, curv, nose, roi);
    const double r2 = roi.suppression_radius * roi.suppression_radius;
    const auto d2 = [](const Landmark& p, std::size_t r, std::size_t c) {
      const double dr = static_cast<double>(r) - static_cast<double>(p.row);
      const double dc = static_cast<double>(c) - static_cast<double>(p.col);
      return dr * dr + dc * dc;
    };
    const double lo = std::min(e.first.score, e.second.score);
    for (std::size_t r = nose.row - roi.upper; r <= nose.row - roi.lower; ++r)
      for (std::size_t c = 0; c < 40; ++c) {
        if (!curv.defined(r, c)) continue;
        if (d2(e.first.point, r, c) < r2 || d2(e.second.point, r, c) < r2) continue;
        ASSERT_LE(corner_score(curv, r, c, roi.score), lo);
      }
    ASSERT_LE(e.first.point.col, e.second.point.col);
    ASSERT_GE(d2(e.first.point, e.second.point.row, e.second.point.col), r2);
  }
}

TEST(EyeCorners, NotFoundOnFlatBand) {
  const RangeImage img(40, 50, std::vector<double>(2000, 2.0));
  const CurvatureMap curv = curvature_map(img);
  EXPECT_THROW(detect_eye_corners(img, curv, Landmark{45, 20, 2.0}, EyeRoiSpec{}), EyeCornersNotFound);
}

TEST(EyeCorners, ScoreModeNames) {
  EXPECT_EQ(parse_score_mode("mean"), ScoreMode::MeanAbs);
  EXPECT_EQ(parse_score_mode("gaussian"), ScoreMode::GaussianAbs);
  EXPECT_EQ(parse_score_mode("principal"), ScoreMode::PrincipalAbs);
  EXPECT_FALSE(parse_score_mode("median"));
  EXPECT_EQ(to_string(ScoreMode::GaussianAbs), "gaussian");
}

}  // namespace
}  // namespace facepose
