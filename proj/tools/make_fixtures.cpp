// SPDX-License-Identifier: Apache-2.0

// Regenerates the depth-grid fixtures under tests/fixtures from the default
// (noiseless) synthetic face.
//   make_fixtures <dir>

#include <filesystem>
#include <iostream>

#include "facepose/rangeio.hpp"
#include "facepose/synthface.hpp"

int main(int argc, char** argv) {
  using namespace facepose;
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  const auto ds = make_dataset({SyntheticFaceSpec{}}, {RotationSpec{Axis::Y, 20.0}, RotationSpec{Axis::Z, 10.0}}, 1);
  save_depth_grid(ds[0].frontal, dir / "face_frontal.csv", DepthFormat::Csv);
  save_depth_grid(ds[0].rotated, dir / "face_yaw_plus20.csv", DepthFormat::Csv);
  save_depth_grid(ds[1].rotated, dir / "face_roll_plus10.csv", DepthFormat::Csv);
  save_depth_grid(ds[0].frontal, dir / "face_frontal.pgm", DepthFormat::Pgm16);
  save_depth_grid(RangeImage(20, 20, std::vector<double>(400, 25.0)), dir / "constant.csv", DepthFormat::Csv);
  return 0;
}
