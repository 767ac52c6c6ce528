// SPDX-License-Identifier: Apache-2.0

#include "facepose/evalharness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "facepose/errors.hpp"
#include "parallel.hpp"

namespace facepose {

namespace {

constexpr std::string_view kCsvHeader = "axis,angle,total,correct,rate";

Landmark to_landmark(const PixelLandmark& p) {
  return Landmark{static_cast<std::size_t>(std::max(p.row, 0L)), static_cast<std::size_t>(std::max(p.col, 0L)),
                  p.world.z};
}

EyeCorners truth_eyes(const TrueLandmarks& t) {
  EyeCorners eyes{{to_landmark(t.eyes[0]), 1.0}, {to_landmark(t.eyes[1]), 1.0}};
  if (eyes.second.point.col < eyes.first.point.col) std::swap(eyes.first, eyes.second);
  return eyes;
}

std::string_view roman(Axis axis) {
  switch (axis) {
    case Axis::X:
      return "I";
    case Axis::Y:
      return "II";
    case Axis::Z:
      return "III";
  }
  return "I";
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

double EvalRow::rate() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

bool row_order(const EvalRow& a, const EvalRow& b) {
  const auto key = [](const EvalRow& r) { return std::make_tuple(r.axis, std::abs(r.angle), r.angle < 0.0); };
  return key(a) < key(b);
}

AccuracyTable AccuracyTable::from_rows(std::vector<EvalRow> rows) {
  AccuracyTable t;
  for (const EvalRow& r : rows) {
    if (r.correct > r.total) throw SpecError("accuracy row has more correct than total images");
    t.total += r.total;
    t.correct += r.correct;
  }
  std::stable_sort(rows.begin(), rows.end(), row_order);
  t.rows = std::move(rows);
  return t;
}

double AccuracyTable::rate() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::string format_rate(std::size_t correct, std::size_t total) {
  const double rate = total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", rate);
  return buf.data();
}

std::string format_angle(double degrees) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), degrees);
  std::string text(buf.data(), end);
  if (degrees > 0.0) text.insert(text.begin(), '+');
  if (text == "-0") text = "0";
  return text;
}

PoseClass expected_pose(const RotationSpec& truth) {
  if (truth.degrees == 0.0) return PoseClass::Frontal;
  switch (truth.axis) {
    case Axis::X:
      return PoseClass::RotatedX;
    case Axis::Y:
      return PoseClass::RotatedY;
    case Axis::Z:
      return PoseClass::RotatedZ;
  }
  return PoseClass::Frontal;
}

EvalResult evaluate(const std::vector<LabeledSample>& dataset, const RunConfig& config, const EvalOptions& options) {
  if (dataset.empty()) throw SpecError("evaluation needs a non-empty dataset");
  config.validate();

  struct Slot {
    SampleOutcome outcome;
    std::optional<SampleFailure> failure;
  };
  std::vector<Slot> slots(dataset.size());
  detail::parallel_for(dataset.size(), options.threads, [&](std::size_t i) {
    const LabeledSample& s = dataset[i];
    Slot& slot = slots[i];
    slot.outcome.expected = expected_pose(s.truth);
    if (!s.usable) {
      slot.failure = SampleFailure{i, "dataset", s.problem};
      return;
    }
    if (options.source == LandmarkSource::Truth) {
      const PoseInput input{to_landmark(s.frontal_truth.nose), to_landmark(s.rotated_truth.nose),
                            truth_eyes(s.rotated_truth), truth_eyes(s.frontal_truth)};
      slot.outcome.predicted = classify_pose(input, config.classifier).pose;
    } else {
      std::string stage = "frontal";
      try {
        const FaceAnalysis frontal = analyze_face(s.frontal, config);
        stage = "rotated";
        const FaceAnalysis rotated = analyze_face(s.rotated, config);
        slot.outcome.predicted =
            classify_pose(PoseInput{frontal.nose, rotated.nose, rotated.eyes, frontal.eyes}, config.classifier).pose;
      } catch (const NoseNotFound& e) {
        slot.failure = SampleFailure{i, stage + " nose", e.what()};
      } catch (const EyeCornersNotFound& e) {
        slot.failure = SampleFailure{i, stage + " eye corners", e.what()};
      }
    }
    slot.outcome.correct = slot.outcome.predicted == slot.outcome.expected;
  });

  std::map<std::pair<Axis, double>, EvalRow> rows;
  EvalResult result;
  result.outcomes.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const RotationSpec& truth = dataset[i].truth;
    EvalRow& row = rows[{truth.axis, truth.degrees}];
    row.axis = truth.axis;
    row.angle = truth.degrees;
    ++row.total;
    if (slots[i].outcome.correct) ++row.correct;
    result.outcomes.push_back(slots[i].outcome);
    if (slots[i].failure) result.failures.push_back(*slots[i].failure);
  }
  std::vector<EvalRow> flat;
  for (auto& [key, row] : rows) flat.push_back(row);
  result.table = AccuracyTable::from_rows(std::move(flat));
  return result;
}

std::string render_table(const AccuracyTable& table, TableFormat format) {
  std::ostringstream os;
  if (format == TableFormat::Csv) {
    os << kCsvHeader << '\n';
    for (const EvalRow& r : table.rows) {
      os << to_string(r.axis) << ',' << format_angle(r.angle) << ',' << r.total << ',' << r.correct << ','
         << format_rate(r.correct, r.total) << '\n';
    }
    return os.str();
  }

  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    std::vector<const EvalRow*> rows;
    for (const EvalRow& r : table.rows) {
      if (r.axis == axis) rows.push_back(&r);
    }
    if (rows.empty()) continue;
    const std::string name(to_string(axis));
    os << "TABLE " << roman(axis) << ". Detection of Pose Alignment across " << name << " axis\n";
    char line[96];
    std::snprintf(line, sizeof line, "%4s %8s %8s %8s %8s\n", "", "A", "B", "C", "rate");
    os << line;
    std::size_t n = 0;
    std::size_t total = 0;
    std::size_t correct = 0;
    for (const EvalRow* r : rows) {
      std::snprintf(line, sizeof line, "%4zu %8s %8zu %8zu %8s\n", ++n, format_angle(r->angle).c_str(), r->total,
                    r->correct, format_rate(r->correct, r->total).c_str());
      os << line;
      total += r->total;
      correct += r->correct;
    }
    os << "A: angle of rotation about the " << name << " axis (degrees)\n"
       << "B: number of 3D images rotated about the " << name << " axis\n"
       << "C: number of poses detected correctly\n"
       << name << " total: " << correct << " of " << total << " (" << format_rate(correct, total) << "%)\n\n";
  }
  os << "Overall: " << table.correct << " of " << table.total << " correct (" << format_rate(table.correct, table.total)
     << "%)\n";
  return os.str();
}

AccuracyTable parse_table_csv(std::string_view text) {
  std::vector<EvalRow> rows;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  bool header_seen = false;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    const std::size_t line_offset = offset;
    offset = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError("accuracy csv must start with '" + std::string(kCsvHeader) + "'", line_no, line_offset);
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw ParseError("accuracy csv row needs 5 fields", line_no, line_offset);
    EvalRow row;
    const auto axis = parse_axis(fields[0]);
    double rate = 0.0;
    if (!axis || !parse_number(fields[1], row.angle) || !parse_number(fields[2], row.total) ||
        !parse_number(fields[3], row.correct) || !parse_number(fields[4], rate)) {
      throw ParseError("malformed accuracy csv row '" + std::string(line) + "'", line_no, line_offset);
    }
    row.axis = *axis;
    if (row.correct > row.total) throw ParseError("correct exceeds total", line_no, line_offset);
    if (std::abs(rate - row.rate()) > 0.005 + 1e-9) {
      throw ParseError("rate column disagrees with counts", line_no, line_offset);
    }
    rows.push_back(row);
  }
  if (!header_seen) throw ParseError("accuracy csv is empty", 0, 0);
  return AccuracyTable::from_rows(std::move(rows));
}

std::string render_summary_json(const EvalResult& result) {
  nlohmann::json j;
  j["total"] = result.table.total;
  j["correct"] = result.table.correct;
  j["rate"] = format_rate(result.table.correct, result.table.total);
  j["rows"] = nlohmann::json::array();
  for (const EvalRow& r : result.table.rows) {
    j["rows"].push_back({{"axis", to_string(r.axis)},
                         {"angle", r.angle},
                         {"total", r.total},
                         {"correct", r.correct},
                         {"rate", format_rate(r.correct, r.total)}});
  }
  j["failures"] = nlohmann::json::array();
  for (const SampleFailure& f : result.failures) {
    j["failures"].push_back({{"sample", f.sample}, {"stage", f.stage}, {"message", f.message}});
  }
  return j.dump(2) + "\n";
}

Summary parse_summary_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("summary json: ") + e.what(), 0, e.byte);
  }
  if (!j.is_object() || !j.contains("total") || !j.contains("correct") || !j["total"].is_number_unsigned() ||
      !j["correct"].is_number_unsigned()) {
    throw ParseError("summary json needs unsigned integer 'total' and 'correct'", 0, 0);
  }
  Summary s;
  s.total = j["total"].get<std::size_t>();
  s.correct = j["correct"].get<std::size_t>();
  if (s.correct > s.total) throw ParseError("summary json: correct exceeds total", 0, 0);
  if (j.contains("failures") && j["failures"].is_array()) {
    for (const auto& f : j["failures"]) {
      s.failures.push_back({f.value("sample", std::size_t{0}), f.value("stage", std::string{}),
                            f.value("message", std::string{})});
    }
  }
  return s;
}

}  // namespace facepose
