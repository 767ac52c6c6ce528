// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "facepose/range_image.hpp"

namespace facepose {

enum class DepthFormat { Pgm16, Csv };

/// "pgm16" / "csv"; returns nullopt for anything else.
std::optional<DepthFormat> parse_depth_format(std::string_view name);
std::string_view to_string(DepthFormat format);

/// Guess the format from the file extension (.pgm -> Pgm16, otherwise Csv).
DepthFormat format_from_extension(const std::filesystem::path& path);

/// How the stored numbers relate to the sensor.
enum class DepthConvention {
  CloserIsLarger,      ///< stored as-is
  DistanceFromSensor,  ///< negated on load so that larger means closer
};

struct LoadOptions {
  DepthConvention convention = DepthConvention::CloserIsLarger;
};

/// Csv: one grid row per line, comma separated, empty cell = invalid.
/// Pgm16: binary P5 with maxval 65535, big-endian samples, 0 = invalid. A
/// "# depth-scale <offset> <step>" comment (written by save_depth_grid) maps
/// a stored sample v to offset + v * step; without it samples are raw mm.
RangeImage load_depth_grid(const std::filesystem::path& path, DepthFormat format,
                           const LoadOptions& options = {});
RangeImage read_depth_grid(std::istream& in, DepthFormat format, const LoadOptions& options = {});

/// Csv output round-trips bit-exactly (shortest round-trip decimal form).
/// Pgm16 output quantizes the valid depth range onto samples 1..65535.
void save_depth_grid(const RangeImage& image, const std::filesystem::path& path, DepthFormat format);
void write_depth_grid(const RangeImage& image, std::ostream& out, DepthFormat format);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

struct PointCloud {
  std::vector<Point3> points;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Regular grid over the world x/y plane. Columns follow +x, rows follow +y,
/// so smaller y is higher up in the image. Cells are half-open:
/// [x_min, x_max) is divided into `width` equal columns.
struct GridSpec {
  std::size_t width = 100;
  std::size_t height = 100;
  double x_min = -80.8;
  double x_max = 79.2;
  double y_min = -80.8;
  double y_max = 79.2;

  /// Throws SpecError on degenerate extents or width/height < 3.
  void validate() const;

  double pitch_x() const { return (x_max - x_min) / static_cast<double>(width); }
  double pitch_y() const { return (y_max - y_min) / static_cast<double>(height); }

  struct Cell {
    long row;
    long col;
  };
  /// Cell containing (x, y); may lie outside the grid.
  Cell cell_of(double x, double y) const;
  bool contains(const Cell& cell) const;

  double col_center_x(std::size_t col) const;
  double row_center_y(std::size_t row) const;
};

/// Orthographic projection along z. Each cell keeps the largest z among the
/// points that land in it; cells nobody hits are invalid.
/// Throws EmptyProjectionError when no point lands inside the grid.
RangeImage project_to_range(const PointCloud& cloud, const GridSpec& spec);

}  // namespace facepose
