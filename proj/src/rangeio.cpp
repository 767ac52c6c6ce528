// SPDX-License-Identifier: Apache-2.0

#include "facepose/rangeio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "facepose/errors.hpp"

namespace facepose {

namespace {

constexpr std::uint32_t kPgmMax = 65535;
constexpr std::string_view kScaleTag = "depth-scale";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void append_double(std::string& out, double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), end);
}

bool parse_double(std::string_view text, double& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(value);
}

RangeImage read_csv(std::istream& in, const LoadOptions& options) {
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  std::string line;
  const double sign = options.convention == DepthConvention::DistanceFromSensor ? -1.0 : 1.0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (trim(line).empty()) {
      // Blank lines are only tolerated at the end of the file.
      std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (trim(rest).find_first_not_of("\r\n \t") != std::string_view::npos) {
        throw ParseError("blank line inside csv grid at line " + std::to_string(line_no), line_no,
                         line_offset);
      }
      break;
    }
    std::size_t cells = 0;
    std::size_t start = 0;
    std::string_view view(line);
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view cell =
          trim(view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (cell.empty()) {
        depth.push_back(RangeImage::kInvalidDepth);
        valid.push_back(0);
      } else {
        double value = 0.0;
        if (!parse_double(cell, value)) {
          throw ParseError("bad csv cell '" + std::string(cell) + "' at line " + std::to_string(line_no) +
                               ", column " + std::to_string(cells + 1),
                           line_no, line_offset + start);
        }
        depth.push_back(sign * value);
        valid.push_back(1);
      }
      ++cells;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      width = cells;
    } else if (cells != width) {
      throw ParseError("csv line " + std::to_string(line_no) + " has " + std::to_string(cells) +
                           " cells, expected " + std::to_string(width),
                       line_no, line_offset);
    }
    ++rows;
  }
  if (width < 3 || rows < 3) {
    throw DimensionError("csv grid is " + std::to_string(width) + "x" + std::to_string(rows) +
                         ", need at least 3x3");
  }
  return RangeImage(width, rows, std::move(depth), std::move(valid));
}

struct PgmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 0;
  double scale_offset = 0.0;
  double scale_step = 1.0;
};

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::istream& in) : in_(in) {}

  std::size_t offset() const { return offset_; }

  PgmHeader read() {
    PgmHeader header;
    char magic[2] = {0, 0};
    if (!in_.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') {
      throw ParseError("pgm16: missing P5 magic", 1, 0);
    }
    offset_ = 2;
    header.width = read_number("width");
    header.height = read_number("height");
    header.maxval = static_cast<std::uint32_t>(read_number("maxval"));
    if (header.maxval != kPgmMax) {
      throw ParseError("pgm16: maxval must be 65535, got " + std::to_string(header.maxval), line_, offset_);
    }
    // Exactly one whitespace byte separates the header from the raster.
    const int sep = in_.get();
    if (sep == std::char_traits<char>::eof() || !std::isspace(sep)) {
      throw ParseError("pgm16: missing whitespace after maxval", line_, offset_);
    }
    ++offset_;
    header.scale_offset = scale_offset_;
    header.scale_step = scale_step_;
    return header;
  }

 private:
  void skip_space_and_comments() {
    while (true) {
      const int c = in_.peek();
      if (c == std::char_traits<char>::eof()) return;
      if (c == '#') {
        std::string comment;
        std::getline(in_, comment);
        offset_ += comment.size() + 1;
        parse_comment(comment);
        ++line_;
      } else if (std::isspace(c)) {
        if (c == '\n') ++line_;
        in_.get();
        ++offset_;
      } else {
        return;
      }
    }
  }

  void parse_comment(const std::string& comment) {
    std::istringstream ss(comment.substr(1));
    std::string tag;
    ss >> tag;
    if (tag != kScaleTag) return;
    std::string off_text;
    std::string step_text;
    ss >> off_text >> step_text;
    double off = 0.0;
    double step = 0.0;
    if (!parse_double(off_text, off) || !parse_double(step_text, step) || !(step > 0.0)) {
      throw ParseError("pgm16: malformed depth-scale comment", line_, offset_);
    }
    scale_offset_ = off;
    scale_step_ = step;
  }

  std::size_t read_number(const char* what) {
    skip_space_and_comments();
    std::string digits;
    while (std::isdigit(in_.peek())) {
      digits.push_back(static_cast<char>(in_.get()));
    }
    if (digits.empty() || digits.size() > 9) {
      throw ParseError(std::string("pgm16: bad ") + what, line_, offset_);
    }
    offset_ += digits.size();
    return std::stoul(digits);
  }

  std::istream& in_;
  std::size_t offset_ = 0;
  std::size_t line_ = 1;
  double scale_offset_ = 0.0;
  double scale_step_ = 1.0;
};

RangeImage read_pgm16(std::istream& in, const LoadOptions& options) {
  PgmHeaderReader reader(in);
  const PgmHeader header = reader.read();
  if (header.width < 3 || header.height < 3) {
    throw DimensionError("pgm16 grid is " + std::to_string(header.width) + "x" +
                         std::to_string(header.height) + ", need at least 3x3");
  }
  const std::size_t count = header.width * header.height;
  std::vector<unsigned char> raw(count * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ParseError("pgm16: raster truncated", 0,
                     reader.offset() + static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0)));
  }
  const double sign = options.convention == DepthConvention::DistanceFromSensor ? -1.0 : 1.0;
  std::vector<double> depth(count);
  std::vector<std::uint8_t> valid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t v = (std::uint32_t{raw[2 * i]} << 8) | raw[2 * i + 1];
    if (v == 0) {
      depth[i] = RangeImage::kInvalidDepth;
      valid[i] = 0;
    } else {
      depth[i] = sign * (header.scale_offset + static_cast<double>(v) * header.scale_step);
      valid[i] = 1;
    }
  }
  return RangeImage(header.width, header.height, std::move(depth), std::move(valid));
}

void write_csv(const RangeImage& image, std::ostream& out) {
  std::string line;
  for (std::size_t r = 0; r < image.height(); ++r) {
    line.clear();
    for (std::size_t c = 0; c < image.width(); ++c) {
      if (c > 0) line.push_back(',');
      if (image.valid(r, c)) append_double(line, image.depth(r, c));
    }
    line.push_back('\n');
    out << line;
  }
}

void write_pgm16(const RangeImage& image, std::ostream& out) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image.mask()[i] != 0) {
      lo = std::min(lo, image.depths()[i]);
      hi = std::max(hi, image.depths()[i]);
    }
  }
  double step = 1.0;
  double offset = 0.0;
  if (std::isfinite(lo)) {
    if (hi > lo) step = (hi - lo) / static_cast<double>(kPgmMax - 1);
    offset = lo - step;  // sample 1 decodes to lo
  }
  std::string header = "P5\n# " + std::string(kScaleTag) + " ";
  append_double(header, offset);
  header.push_back(' ');
  append_double(header, step);
  header += "\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n65535\n";
  out << header;

  std::vector<unsigned char> raw(image.size() * 2, 0);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image.mask()[i] == 0) continue;
    const double q = std::round((image.depths()[i] - lo) / step) + 1.0;
    const auto v = static_cast<std::uint32_t>(std::clamp(q, 1.0, static_cast<double>(kPgmMax)));
    raw[2 * i] = static_cast<unsigned char>(v >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

std::optional<DepthFormat> parse_depth_format(std::string_view name) {
  if (name == "pgm16") return DepthFormat::Pgm16;
  if (name == "csv") return DepthFormat::Csv;
  return std::nullopt;
}

std::string_view to_string(DepthFormat format) {
  return format == DepthFormat::Pgm16 ? "pgm16" : "csv";
}

DepthFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".pgm" || ext == ".PGM") ? DepthFormat::Pgm16 : DepthFormat::Csv;
}

RangeImage read_depth_grid(std::istream& in, DepthFormat format, const LoadOptions& options) {
  return format == DepthFormat::Csv ? read_csv(in, options) : read_pgm16(in, options);
}

RangeImage load_depth_grid(const std::filesystem::path& path, DepthFormat format, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_depth_grid(in, format, options);
}

void write_depth_grid(const RangeImage& image, std::ostream& out, DepthFormat format) {
  if (format == DepthFormat::Csv) {
    write_csv(image, out);
  } else {
    write_pgm16(image, out);
  }
}

void save_depth_grid(const RangeImage& image, const std::filesystem::path& path, DepthFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_depth_grid(image, out, format);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void GridSpec::validate() const {
  if (width < 3 || height < 3) throw SpecError("grid must be at least 3x3");
  if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_min) || !std::isfinite(y_max)) {
    throw SpecError("grid extents must be finite non-degenerate intervals");
  }
}

GridSpec::Cell GridSpec::cell_of(double x, double y) const {
  const double fc = std::floor((x - x_min) / (x_max - x_min) * static_cast<double>(width));
  const double fr = std::floor((y - y_min) / (y_max - y_min) * static_cast<double>(height));
  // Clamp far-away points so the long conversion stays defined.
  constexpr double kFar = 1e15;
  return {static_cast<long>(std::clamp(fr, -kFar, kFar)), static_cast<long>(std::clamp(fc, -kFar, kFar))};
}

bool GridSpec::contains(const Cell& cell) const {
  return cell.row >= 0 && cell.col >= 0 && static_cast<std::size_t>(cell.row) < height &&
         static_cast<std::size_t>(cell.col) < width;
}

double GridSpec::col_center_x(std::size_t col) const {
  return x_min + (static_cast<double>(col) + 0.5) * pitch_x();
}

double GridSpec::row_center_y(std::size_t row) const {
  return y_min + (static_cast<double>(row) + 0.5) * pitch_y();
}

RangeImage project_to_range(const PointCloud& cloud, const GridSpec& spec) {
  spec.validate();
  if (cloud.points.empty()) throw EmptyProjectionError("point cloud is empty");

  const std::size_t count = spec.width * spec.height;
  std::vector<double> depth(count, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> valid(count, 0);
  std::size_t hits = 0;
  for (const Point3& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw SpecError("point cloud contains a non-finite coordinate");
    }
    const auto cell = spec.cell_of(p.x, p.y);
    if (!spec.contains(cell)) continue;
    const std::size_t i = static_cast<std::size_t>(cell.row) * spec.width + static_cast<std::size_t>(cell.col);
    depth[i] = std::max(depth[i], p.z);
    valid[i] = 1;
    ++hits;
  }
  if (hits == 0) throw EmptyProjectionError("no point falls inside the grid extents");
  return RangeImage(spec.width, spec.height, std::move(depth), std::move(valid));
}

}  // namespace facepose
