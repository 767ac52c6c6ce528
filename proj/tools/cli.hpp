// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "facepose/synthface.hpp"

namespace facepose::cli {

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;     ///< bad arguments, unreadable or malformed files
inline constexpr int kExitPipeline = 3;  ///< nose or eye-corner detection failed

/// Runs the command line `args` (without the program name) and returns the
/// exit status. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// On-disk dataset: one directory per sample holding frontal and rotated
/// depth grids, plus manifest.json at the root.
struct ManifestEntry {
  std::size_t subject = 0;
  RotationSpec truth;
  std::filesystem::path frontal;  ///< relative to the dataset root
  std::filesystem::path rotated;
  TrueLandmarks frontal_truth;
  TrueLandmarks rotated_truth;
  bool usable = true;
  std::string problem;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::size_t subjects = 0;
  double noise_sigma = 0.0;     ///< mm, absolute part
  double noise_relative = 0.0;  ///< fraction of each subject's face depth range
  std::string depth_format;
  std::vector<ManifestEntry> samples;
};

std::string render_manifest(const Manifest& manifest);
/// Throws ParseError naming the offending entry.
Manifest parse_manifest(const std::string& text);

/// Loads every sample of a dataset written by the synth command.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& root);

}  // namespace facepose::cli
