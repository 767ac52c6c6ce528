// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facepose/pipeline.hpp"
#include "facepose/poseclassify.hpp"
#include "facepose/synthface.hpp"

namespace facepose {

/// One line of an accuracy table: angle (column A), images (B), detected
/// correctly (C).
struct EvalRow {
  Axis axis = Axis::X;
  double angle = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;

  double rate() const;  ///< percent
  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct AccuracyTable {
  std::vector<EvalRow> rows;
  std::size_t total = 0;
  std::size_t correct = 0;

  /// Sorts rows (axis, then |angle|, positive first) and sums the totals.
  /// Throws SpecError when a row has correct > total.
  static AccuracyTable from_rows(std::vector<EvalRow> rows);

  double rate() const;  ///< percent; 0 for an empty table
  friend bool operator==(const AccuracyTable&, const AccuracyTable&) = default;
};

/// Canonical row order shared by evaluation and rendering.
bool row_order(const EvalRow& a, const EvalRow& b);

/// Percentage with two decimals, e.g. "66.75".
std::string format_rate(std::size_t correct, std::size_t total);
/// "+5", "-40", "0", "+2.5".
std::string format_angle(double degrees);

struct SampleFailure {
  std::size_t sample = 0;
  std::string stage;
  std::string message;
};

struct SampleOutcome {
  std::optional<PoseClass> predicted;
  PoseClass expected = PoseClass::Frontal;
  bool correct = false;
};

struct EvalResult {
  AccuracyTable table;
  std::vector<SampleOutcome> outcomes;  ///< dataset order
  std::vector<SampleFailure> failures;  ///< ascending sample index
};

enum class LandmarkSource {
  Pipeline,  ///< detect landmarks from the rendered scans
  Truth,     ///< feed the generator's projected landmarks to the classifier
};

struct EvalOptions {
  LandmarkSource source = LandmarkSource::Pipeline;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// The class a sample should receive: Frontal at angle 0, else its axis.
PoseClass expected_pose(const RotationSpec& truth);

/// Runs every sample through the pipeline and tallies per (axis, angle).
/// Pipeline failures and unusable samples count as incorrect and are listed
/// in `failures`. Output is independent of thread count and sample order
/// (apart from the order of `outcomes`).
EvalResult evaluate(const std::vector<LabeledSample>& dataset, const RunConfig& config,
                    const EvalOptions& options = {});

enum class TableFormat { Csv, Text };

/// Csv: header "axis,angle,total,correct,rate" and one line per row.
/// Text: one "A B C" table per axis followed by the overall rate.
std::string render_table(const AccuracyTable& table, TableFormat format);

/// Inverse of the csv rendering. Throws ParseError on malformed input.
AccuracyTable parse_table_csv(std::string_view text);

/// Overall counts, as carried by a structured summary.
struct Summary {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<SampleFailure> failures;
};

std::string render_summary_json(const EvalResult& result);
/// Accepts the output of render_summary_json or any JSON object with integer
/// "total" and "correct" fields. Throws ParseError otherwise.
Summary parse_summary_json(std::string_view text);

}  // namespace facepose
