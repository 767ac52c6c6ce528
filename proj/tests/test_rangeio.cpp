// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "facepose/errors.hpp"
#include "facepose/rangeio.hpp"
#include "facepose/synthface.hpp"
#include "test_util.hpp"

namespace facepose {
namespace {

RangeImage read_csv(const std::string& text) {
  std::istringstream in(text);
  return read_depth_grid(in, DepthFormat::Csv);
}

std::string write(const RangeImage& img, DepthFormat format) {
  std::ostringstream out;
  write_depth_grid(img, out, format);
  return out.str();
}

RangeImage read(const std::string& bytes, DepthFormat format) {
  std::istringstream in(bytes);
  return read_depth_grid(in, format);
}

TEST(RangeIo, ConstantCsv) {
  const RangeImage img = read_csv("5.0,5.0,5.0\n5.0,5.0,5.0\n5.0,5.0,5.0\n");
  EXPECT_EQ(img.width(), 3u);
  EXPECT_EQ(img.height(), 3u);
  EXPECT_EQ(img.valid_count(), 9u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(img.depth(r, c), 5.0);
}

TEST(RangeIo, CsvEmptyCellIsInvalid) {
  const RangeImage img = read_csv("1,2,3\n4,,6\n7,8,9\n");
  EXPECT_FALSE(img.valid(1, 1));
  EXPECT_EQ(img.valid_count(), 8u);
}

TEST(RangeIo, Pgm16ZeroIsInvalid) {
  std::string bytes = "P5\n3 3\n65535\n";
  for (int i = 0; i < 9; ++i) {
    const int v = i == 4 ? 0 : 1000 + i;
    bytes.push_back(static_cast<char>(v >> 8));
    bytes.push_back(static_cast<char>(v & 0xff));
  }
  const RangeImage img = read(bytes, DepthFormat::Pgm16);
  EXPECT_FALSE(img.valid(1, 1));
  EXPECT_EQ(img.valid_count(), 8u);
  EXPECT_EQ(img.depth(0, 0), 1000.0);  // no scale comment: raw samples
}

TEST(RangeIo, CsvRoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t w = 3 + rng() % 15;
    const std::size_t h = 3 + rng() % 15;
    const RangeImage img = test::random_masked_grid(rng, w, h, 0.1, -1e3, 1e3);
    const RangeImage back = read(write(img, DepthFormat::Csv), DepthFormat::Csv);
    ASSERT_EQ(back, img) << "trial " << trial;
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (img.mask()[i]) {
        ASSERT_EQ(std::bit_cast<std::uint64_t>(back.depths()[i]), std::bit_cast<std::uint64_t>(img.depths()[i]));
      }
    }
  }
}

TEST(RangeIo, ConstantGridRoundTripsThroughFiles) {
  const auto dir = test::scratch_dir("rangeio_const");
  const RangeImage img(4, 5, std::vector<double>(20, 12.25));
  save_depth_grid(img, dir / "c.csv", DepthFormat::Csv);
  EXPECT_EQ(load_depth_grid(dir / "c.csv", DepthFormat::Csv), img);
  save_depth_grid(img, dir / "c.pgm", DepthFormat::Pgm16);
  EXPECT_EQ(load_depth_grid(dir / "c.pgm", DepthFormat::Pgm16), img);
}

TEST(RangeIo, Pgm16QuantizationBound) {
  std::vector<double> d;
  for (int i = 0; i < 100; ++i) d.push_back(-37.5 + 0.731 * i);
  const RangeImage ramp(10, 10, d);
  const RangeImage back = read(write(ramp, DepthFormat::Pgm16), DepthFormat::Pgm16);
  const double range = d.back() - d.front();
  ASSERT_EQ(back.valid_count(), 100u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_LE(std::abs(back.depths()[i] - d[i]), range / 65535.0);
}

TEST(RangeIo, Pgm16KeepsInvalidPixels) {
  std::mt19937_64 rng(3);
  const RangeImage img = test::random_masked_grid(rng, 9, 7, 0.3);
  const RangeImage back = read(write(img, DepthFormat::Pgm16), DepthFormat::Pgm16);
  EXPECT_TRUE(std::equal(img.mask().begin(), img.mask().end(), back.mask().begin()));
}

TEST(RangeIo, MalformedCsvReportsLine) {
  try {
    read_csv("1,2,3\n4,x,6\n7,8,9\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.offset(), 8u);  // the "x" cell
  }
  EXPECT_THROW(read_csv("1,2,3\n4,5\n7,8,9\n"), ParseError);
}

TEST(RangeIo, TruncatedPgmReportsOffset) {
  const std::string bytes = "P5\n3 3\n65535\n\x01\x02\x03";
  try {
    read(bytes, DepthFormat::Pgm16);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(RangeIo, TooSmallIsDimensionError) {
  EXPECT_THROW(read_csv("1,2\n3,4\n"), DimensionError);
  EXPECT_THROW(read_csv("1,2,3\n4,5,6\n"), DimensionError);
}

TEST(RangeIo, UnwritablePathIsIoError) {
  const RangeImage img(3, 3, std::vector<double>(9, 1.0));
  EXPECT_THROW(save_depth_grid(img, "/nonexistent-dir/x.csv", DepthFormat::Csv), IoError);
  EXPECT_THROW(load_depth_grid("/nonexistent-dir/x.csv", DepthFormat::Csv), IoError);
}

TEST(RangeIo, DistanceConventionNegates) {
  std::istringstream in("1,2,3\n4,5,6\n7,8,9\n");
  const RangeImage img = read_depth_grid(in, DepthFormat::Csv, {DepthConvention::DistanceFromSensor});
  EXPECT_EQ(img.depth(0, 0), -1.0);
  EXPECT_EQ(img.depth(2, 2), -9.0);
}

TEST(Projection, SinglePointLandsInCentreCell) {
  GridSpec g;
  g.width = 3;
  g.height = 3;
  g.x_min = 0.0;
  g.x_max = 3.0;
  g.y_min = 0.0;
  g.y_max = 3.0;
  const RangeImage img = project_to_range(PointCloud{{{1.5, 1.5, 4.0}}}, g);
  EXPECT_EQ(img.valid_count(), 1u);
  EXPECT_TRUE(img.valid(1, 1));
  EXPECT_EQ(img.depth(1, 1), 4.0);
}

TEST(Projection, ClosestPointWins) {
  GridSpec g;
  g.width = 3;
  g.height = 3;
  g.x_min = 0.0;
  g.x_max = 3.0;
  g.y_min = 0.0;
  g.y_max = 3.0;
  const RangeImage img = project_to_range(PointCloud{{{0.2, 0.2, 10.0}, {0.7, 0.6, 20.0}}}, g);
  const auto cell = g.cell_of(0.2, 0.2);
  ASSERT_TRUE(g.contains(cell));
  EXPECT_EQ(img.depth(cell.row, cell.col), 20.0);
  EXPECT_EQ(img.valid_count(), 1u);
}

TEST(Projection, AllOutsideIsEmptyProjection) {
  EXPECT_THROW(project_to_range(PointCloud{{{1e4, 1e4, 1.0}}}, GridSpec{}), EmptyProjectionError);
  EXPECT_THROW(project_to_range(PointCloud{}, GridSpec{}), EmptyProjectionError);
}

TEST(Projection, PermutationInvariantAndDepthsAttained) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(-90.0, 90.0);
  std::uniform_real_distribution<double> z(-20.0, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud cloud;
    for (int i = 0; i < 3000; ++i) cloud.points.push_back({xy(rng), xy(rng), z(rng)});
    const RangeImage a = project_to_range(cloud, GridSpec{});
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
    const RangeImage b = project_to_range(cloud, GridSpec{});
    ASSERT_EQ(a, b);
    for (std::size_t r = 0; r < a.height(); ++r) {
      for (std::size_t c = 0; c < a.width(); ++c) {
        if (!a.valid(r, c)) continue;
        const bool attained = std::any_of(cloud.points.begin(), cloud.points.end(),
                                          [&](const Point3& p) { return p.z == a.depth(r, c); });
        ASSERT_TRUE(attained);
      }
    }
  }
}

TEST(Projection, FrontalFaceMaximumIsNoseApex) {
  const SyntheticFaceSpec spec;
  const RangeImage img = project_to_range(generate_face(spec), spec.grid);
  std::size_t best = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img.mask()[i] && (!img.mask()[best] || img.depths()[i] > img.depths()[best])) best = i;
  }
  const auto apex = spec.grid.cell_of(spec.nose.center_x, spec.nose.center_y);
  ASSERT_TRUE(spec.grid.contains(apex));
  const long row = static_cast<long>(best / img.width());
  const long col = static_cast<long>(best % img.width());
  EXPECT_LE(std::abs(row - apex.row), 1);
  EXPECT_LE(std::abs(col - apex.col), 1);
}

TEST(Formats, NamesAndExtensions) {
  EXPECT_EQ(parse_depth_format("pgm16"), DepthFormat::Pgm16);
  EXPECT_EQ(parse_depth_format("csv"), DepthFormat::Csv);
  EXPECT_FALSE(parse_depth_format("png"));
  EXPECT_EQ(format_from_extension("a/b.pgm"), DepthFormat::Pgm16);
  EXPECT_EQ(format_from_extension("a/b.csv"), DepthFormat::Csv);
}

}  // namespace
}  // namespace facepose
