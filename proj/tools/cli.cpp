// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "facepose/errors.hpp"
#include "facepose/evalharness.hpp"
#include "facepose/pipeline.hpp"
#include "facepose/rangeio.hpp"

namespace facepose::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestName = "manifest.json";
constexpr std::string_view kManifestKind = "facepose-dataset";

enum class OutputFormat { Text, Csv, Structured };

/// Flags shared by every command that runs the pipeline.
struct PipelineFlags {
  RunConfig config;
  std::vector<std::size_t> crop;
  std::string score = "mean";
  std::string input_format;  // empty: by file extension
  bool distance_depth = false;

  void add_to(CLI::App& app) {
    app.add_option("--epsilon", config.classifier.epsilon, "eye-row tolerance in pixels")->capture_default_str();
    app.add_option("--sigma", config.smooth.sigma, "Gaussian smoothing sigma in pixels")->capture_default_str();
    app.add_option("--radius", config.smooth.radius, "smoothing kernel radius in pixels")->capture_default_str();
    app.add_option("--fit-window", config.fit_window, "curvature fit window (odd, >= 5)")->capture_default_str();
    app.add_option("--pixel-pitch", config.pixel_pitch, "mm per pixel for curvature")->capture_default_str();
    app.add_option("--roi-upper", config.roi.upper, "eye band starts this many rows above the nose")
        ->capture_default_str();
    app.add_option("--roi-lower", config.roi.lower, "eye band ends this many rows above the nose")
        ->capture_default_str();
    app.add_option("--suppression-radius", config.roi.suppression_radius, "minimum eye-corner separation in pixels")
        ->capture_default_str();
    app.add_option("--score", score, "eye-corner score: mean, gaussian or principal")->capture_default_str();
    app.add_option("--crop", crop, "crop window row_begin,row_end,col_begin,col_end (default: central 70%)")
        ->expected(4)
        ->delimiter(',');
    app.add_option("--input-format", input_format, "depth file format: pgm16 or csv (default: by extension)");
    app.add_flag("--distance-depth", distance_depth, "input depths are distances from the sensor (smaller = closer)");
  }

  /// Folds the string-typed flags into `config`. Throws SpecError.
  void finish() {
    const auto mode = parse_score_mode(score);
    if (!mode) throw SpecError("unknown score mode '" + score + "'");
    config.roi.score = *mode;
    if (!crop.empty()) config.crop = CropSpec{crop[0], crop[1], crop[2], crop[3]};
    config.validate();
  }

  RangeImage load(const std::string& path) const {
    DepthFormat format = format_from_extension(path);
    if (!input_format.empty()) {
      const auto parsed = parse_depth_format(input_format);
      if (!parsed) throw SpecError("unknown depth format '" + input_format + "'");
      format = *parsed;
    }
    LoadOptions options;
    if (distance_depth) options.convention = DepthConvention::DistanceFromSensor;
    return load_depth_grid(path, format, options);
  }
};

OutputFormat parse_output_format(const std::string& name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "structured" || name == "json") return OutputFormat::Structured;
  throw SpecError("unknown output format '" + name + "'");
}

std::string fixed6(double v) {
  if (!std::isfinite(v)) return "nan";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6f", v);
  return buf.data();
}

std::string number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json landmark_json(const Landmark& p) { return {{"row", p.row}, {"col", p.col}, {"depth", p.depth}}; }

json corner_json(const EyeCorner& c) {
  return {{"row", c.point.row}, {"col", c.point.col}, {"curvature", c.score}};
}

json analysis_json(const FaceAnalysis& a) {
  json nose = landmark_json(a.nose);
  nose["curvature"] = std::isfinite(a.nose_score) ? json(a.nose_score) : json(nullptr);
  return {{"nose", nose},
          {"eye_corners", json::array({corner_json(a.eyes.first), corner_json(a.eyes.second)})},
          {"otsu_threshold", a.otsu_threshold},
          {"crop",
           {{"row_begin", a.crop.row_begin},
            {"row_end", a.crop.row_end},
            {"col_begin", a.crop.col_begin},
            {"col_end", a.crop.col_end}}}};
}

void write_detection(const Detection& d, OutputFormat format, std::ostream& out) {
  const PoseReport& r = d.report;
  if (format == OutputFormat::Structured) {
    json j{{"pose", to_string(r.pose)},
           {"eye_line_diff", r.eye_line_diff},
           {"nose_dcol", r.nose_dcol},
           {"nose_drow", r.nose_drow},
           {"epsilon", r.epsilon},
           {"trace", r.trace},
           {"frontal", analysis_json(d.frontal)},
           {"rotated", analysis_json(d.rotated)}};
    out << j.dump(2) << '\n';
    return;
  }
  if (format == OutputFormat::Csv) {
    out << "pose,eye_line_diff,nose_dcol,nose_drow,epsilon,frontal_nose_row,frontal_nose_col,rotated_nose_row,"
           "rotated_nose_col,eye1_row,eye1_col,eye2_row,eye2_col,trace\n";
    std::string trace;
    for (const std::string& t : r.trace) trace += (trace.empty() ? "" : "; ") + t;
    out << to_string(r.pose) << ',' << number(r.eye_line_diff) << ',' << number(r.nose_dcol) << ','
        << number(r.nose_drow) << ',' << number(r.epsilon) << ',' << d.frontal.nose.row << ',' << d.frontal.nose.col
        << ',' << d.rotated.nose.row << ',' << d.rotated.nose.col << ',' << d.rotated.eyes.first.point.row << ','
        << d.rotated.eyes.first.point.col << ',' << d.rotated.eyes.second.point.row << ','
        << d.rotated.eyes.second.point.col << ",\"" << trace << "\"\n";
    return;
  }
  out << "pose: " << to_string(r.pose) << '\n'
      << "eye-line diff: " << number(r.eye_line_diff) << '\n'
      << "nose deviation: col " << number(r.nose_dcol) << ", row " << number(r.nose_drow) << '\n'
      << "epsilon: " << number(r.epsilon) << '\n'
      << "frontal nose: row " << d.frontal.nose.row << ", col " << d.frontal.nose.col << '\n'
      << "rotated nose: row " << d.rotated.nose.row << ", col " << d.rotated.nose.col << '\n'
      << "rotated eye corners: (" << d.rotated.eyes.first.point.row << ", " << d.rotated.eyes.first.point.col
      << ") (" << d.rotated.eyes.second.point.row << ", " << d.rotated.eyes.second.point.col << ")\n"
      << "trace:\n";
  for (const std::string& t : r.trace) out << "  " << t << '\n';
}

void write_landmarks(const FaceAnalysis& a, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Structured) {
    out << analysis_json(a).dump(2) << '\n';
    return;
  }
  if (format == OutputFormat::Csv) {
    out << "landmark,row,col,curvature\n"
        << "nose," << a.nose.row << ',' << a.nose.col << ',' << fixed6(a.nose_score) << '\n'
        << "eye," << a.eyes.first.point.row << ',' << a.eyes.first.point.col << ',' << fixed6(a.eyes.first.score)
        << '\n'
        << "eye," << a.eyes.second.point.row << ',' << a.eyes.second.point.col << ','
        << fixed6(a.eyes.second.score) << '\n';
    return;
  }
  out << "Nose tip\nRow Col Curvature\n"
      << a.nose.row << ' ' << a.nose.col << ' ' << fixed6(a.nose_score) << "\n\n"
      << "Eye corners\nRow Col Curvature\n";
  for (const EyeCorner* c : {&a.eyes.first, &a.eyes.second}) {
    out << c->point.row << ' ' << c->point.col << ' ' << fixed6(c->score) << '\n';
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

json pixel_json(const PixelLandmark& p) {
  return {{"row", p.row}, {"col", p.col}, {"x", p.world.x}, {"y", p.world.y}, {"z", p.world.z}};
}

json truth_json(const TrueLandmarks& t) {
  return {{"nose", pixel_json(t.nose)}, {"eyes", json::array({pixel_json(t.eyes[0]), pixel_json(t.eyes[1])})}};
}

PixelLandmark pixel_from(const json& j) {
  return {j.at("row").get<long>(), j.at("col").get<long>(),
          Point3{j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()}};
}

TrueLandmarks truth_from(const json& j) {
  const json& eyes = j.at("eyes");
  if (!eyes.is_array() || eyes.size() != 2) throw SpecError("'eyes' must hold two landmarks");
  return {pixel_from(j.at("nose")), {pixel_from(eyes[0]), pixel_from(eyes[1])}};
}

int fail(std::ostream& err, int status, const std::string& message) {
  err << "facepose: " << message << '\n';
  return status;
}

}  // namespace

std::string render_manifest(const Manifest& m) {
  json j{{"kind", kManifestKind},
         {"version", 1},
         {"seed", m.seed},
         {"subjects", m.subjects},
         {"noise_sigma", m.noise_sigma},
         {"noise_relative", m.noise_relative},
         {"depth_format", m.depth_format},
         {"samples", json::array()}};
  for (const ManifestEntry& e : m.samples) {
    j["samples"].push_back({{"subject", e.subject},
                            {"axis", to_string(e.truth.axis)},
                            {"angle", e.truth.degrees},
                            {"frontal", e.frontal.generic_string()},
                            {"rotated", e.rotated.generic_string()},
                            {"usable", e.usable},
                            {"problem", e.problem},
                            {"truth", {{"frontal", truth_json(e.frontal_truth)}, {"rotated", truth_json(e.rotated_truth)}}}});
  }
  return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what(), 0, e.byte);
  }
  Manifest m;
  try {
    if (!j.is_object() || j.value("kind", std::string{}) != kManifestKind) {
      throw SpecError("not a facepose dataset manifest");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.subjects = j.at("subjects").get<std::size_t>();
    m.noise_sigma = j.at("noise_sigma").get<double>();
    m.noise_relative = j.at("noise_relative").get<double>();
    m.depth_format = j.at("depth_format").get<std::string>();
  } catch (const std::exception& e) {
    throw ParseError(std::string("manifest header: ") + e.what(), 0, 0);
  }
  const json* samples = j.contains("samples") ? &j["samples"] : nullptr;
  if (samples == nullptr || !samples->is_array()) throw ParseError("manifest has no 'samples' array", 0, 0);
  for (std::size_t i = 0; i < samples->size(); ++i) {
    const json& s = (*samples)[i];
    try {
      ManifestEntry e;
      e.subject = s.at("subject").get<std::size_t>();
      const auto axis = parse_axis(s.at("axis").get<std::string>());
      if (!axis) throw SpecError("unknown axis '" + s.at("axis").get<std::string>() + "'");
      e.truth = RotationSpec{*axis, s.at("angle").get<double>()};
      e.frontal = s.at("frontal").get<std::string>();
      e.rotated = s.at("rotated").get<std::string>();
      e.usable = s.at("usable").get<bool>();
      e.problem = s.value("problem", std::string{});
      e.frontal_truth = truth_from(s.at("truth").at("frontal"));
      e.rotated_truth = truth_from(s.at("truth").at("rotated"));
      m.samples.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw ParseError("manifest sample " + std::to_string(i) + ": " + e.what(), 0, 0);
    }
  }
  return m;
}

std::vector<LabeledSample> load_dataset(const fs::path& root) {
  const Manifest m = parse_manifest(read_file(root / kManifestName));
  std::vector<LabeledSample> out;
  out.reserve(m.samples.size());
  for (std::size_t i = 0; i < m.samples.size(); ++i) {
    const ManifestEntry& e = m.samples[i];
    LabeledSample s{e.subject,
                    i,
                    e.truth,
                    load_depth_grid(root / e.frontal, format_from_extension(e.frontal)),
                    load_depth_grid(root / e.rotated, format_from_extension(e.rotated)),
                    e.frontal_truth,
                    e.rotated_truth,
                    e.usable,
                    e.problem};
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

int cmd_detect(const std::string& frontal_path, const std::string& rotated_path, PipelineFlags& flags,
               OutputFormat format, std::ostream& out, std::ostream& err) {
  const RangeImage frontal = flags.load(frontal_path);
  const RangeImage rotated = flags.load(rotated_path);
  std::string stage = "frontal";
  try {
    const FaceAnalysis f = analyze_face(frontal, flags.config);
    stage = "rotated";
    const FaceAnalysis r = analyze_face(rotated, flags.config);
    Detection d{f, r, classify_pose(PoseInput{f.nose, r.nose, r.eyes, f.eyes}, flags.config.classifier)};
    write_detection(d, format, out);
  } catch (const NoseNotFound& e) {
    return fail(err, kExitPipeline, stage + " scan: " + e.what());
  } catch (const EyeCornersNotFound& e) {
    return fail(err, kExitPipeline, stage + " scan: " + e.what());
  }
  return kExitOk;
}

int cmd_landmarks(const std::string& path, PipelineFlags& flags, OutputFormat format, std::ostream& out,
                  std::ostream& err) {
  const RangeImage image = flags.load(path);
  try {
    write_landmarks(analyze_face(image, flags.config), format, out);
  } catch (const NoseNotFound& e) {
    return fail(err, kExitPipeline, e.what());
  } catch (const EyeCornersNotFound& e) {
    return fail(err, kExitPipeline, e.what());
  }
  return kExitOk;
}

struct SynthFlags {
  std::string out_dir;
  std::size_t subjects = 10;
  std::vector<double> angles{5, -5, 10, -10, 18, -18, 40, -40};
  std::vector<std::string> axes{"x", "y", "z"};
  double noise = 0.0;
  double noise_relative = 0.0;
  std::uint64_t seed = 1;
  std::string depth_format = "csv";
  unsigned threads = 0;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  const auto format = parse_depth_format(f.depth_format);
  if (!format) throw SpecError("unknown depth format '" + f.depth_format + "'");
  if (f.subjects == 0) throw SpecError("need at least one subject");
  if (!(f.noise >= 0.0) || !(f.noise_relative >= 0.0)) throw SpecError("noise must be non-negative");
  std::vector<Axis> axes;
  for (const std::string& a : f.axes) {
    const auto axis = parse_axis(a);
    if (!axis) throw SpecError("unknown axis '" + a + "'");
    axes.push_back(*axis);
  }

  std::vector<SyntheticFaceSpec> specs = subject_specs(f.subjects, f.seed);
  for (SyntheticFaceSpec& s : specs) s.noise_sigma = f.noise + f.noise_relative * face_depth_range(s);
  const std::vector<LabeledSample> dataset = make_dataset(specs, make_sweep(axes, f.angles), f.threads);

  const fs::path root(f.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  Manifest m;
  m.seed = f.seed;
  m.subjects = f.subjects;
  m.noise_sigma = f.noise;
  m.noise_relative = f.noise_relative;
  m.depth_format = std::string(to_string(*format));
  const std::string ext = *format == DepthFormat::Pgm16 ? ".pgm" : ".csv";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LabeledSample& s = dataset[i];
    std::array<char, 32> name{};
    std::snprintf(name.data(), name.size(), "sample_%04zu", i);
    const fs::path dir(name.data());
    fs::create_directories(root / dir, ec);
    if (ec) throw IoError("cannot create " + (root / dir).string() + ": " + ec.message());
    ManifestEntry e{s.spec_index, s.truth, dir / ("frontal" + ext), dir / ("rotated" + ext),
                    s.frontal_truth, s.rotated_truth, s.usable, s.problem};
    save_depth_grid(s.frontal, root / e.frontal, *format);
    save_depth_grid(s.rotated, root / e.rotated, *format);
    m.samples.push_back(std::move(e));
  }
  write_file(root / kManifestName, render_manifest(m));
  out << dataset.size() << " samples written to " << root.string() << '\n';
  return kExitOk;
}

struct EvalFlags {
  std::string dataset;
  std::string counts;
  std::string report;
  bool truth_landmarks = false;
  unsigned threads = 0;
};

int cmd_eval(const EvalFlags& f, const PipelineFlags& flags, std::ostream& out, std::ostream& err) {
  if (!f.counts.empty()) {
    const fs::path path(f.counts);
    const std::string text = read_file(path);
    if (path.extension() == ".json") {
      const Summary s = parse_summary_json(text);
      out << "Overall: " << s.correct << " of " << s.total << " correct (" << format_rate(s.correct, s.total)
          << "%)\n";
    } else {
      out << render_table(parse_table_csv(text), TableFormat::Text);
    }
    return kExitOk;
  }
  if (f.dataset.empty()) return fail(err, kExitInput, "eval needs a dataset directory or --counts FILE");

  const std::vector<LabeledSample> dataset = load_dataset(f.dataset);
  if (dataset.empty()) throw SpecError("dataset has no samples");
  const EvalOptions options{f.truth_landmarks ? LandmarkSource::Truth : LandmarkSource::Pipeline, f.threads};
  const EvalResult result = evaluate(dataset, flags.config, options);

  const fs::path prefix = f.report.empty() ? fs::path(f.dataset) / "report" : fs::path(f.report);
  if (prefix.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(prefix.parent_path(), ec);
    if (ec) throw IoError("cannot create " + prefix.parent_path().string() + ": " + ec.message());
  }
  const std::string text = render_table(result.table, TableFormat::Text);
  write_file(prefix.string() + ".csv", render_table(result.table, TableFormat::Csv));
  write_file(prefix.string() + ".txt", text);
  write_file(prefix.string() + ".json", render_summary_json(result));
  out << text;
  if (!result.failures.empty()) out << result.failures.size() << " samples failed in the pipeline (see .json)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-orientation detection for 3D face range images", "facepose"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values ([detect], [eval] ... sections)");

  std::string format_name = "text";

  PipelineFlags detect_flags;
  std::string frontal_path;
  std::string rotated_path;
  CLI::App* detect = app.add_subcommand("detect", "classify the rotation between a frontal and a rotated scan");
  detect->add_option("frontal", frontal_path, "frontal depth grid (.csv or .pgm)")->required();
  detect->add_option("rotated", rotated_path, "rotated depth grid")->required();
  detect->add_option("--format", format_name, "text, csv or structured")->capture_default_str();
  detect_flags.add_to(*detect);

  PipelineFlags landmark_flags;
  std::string input_path;
  CLI::App* landmarks = app.add_subcommand("landmarks", "report the nose tip and eye corners of one scan");
  landmarks->add_option("input", input_path, "depth grid (.csv or .pgm)")->required();
  landmarks->add_option("--format", format_name, "text, csv or structured")->capture_default_str();
  landmark_flags.add_to(*landmarks);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "write a labeled synthetic dataset");
  synth->add_option("--out", synth_flags.out_dir, "output directory")->required();
  synth->add_option("--subjects", synth_flags.subjects, "number of synthetic subjects")->capture_default_str();
  synth->add_option("--angles", synth_flags.angles, "rotation angles in degrees, e.g. --angles=5,-5,40")
      ->delimiter(',')
      ->capture_default_str();
  synth->add_option("--axes", synth_flags.axes, "rotation axes from x,y,z")->delimiter(',')->capture_default_str();
  CLI::Option* noise = synth->add_option("--noise", synth_flags.noise, "depth noise sigma in mm");
  synth->add_option("--noise-relative", synth_flags.noise_relative,
                    "depth noise sigma as a fraction of each face's depth range")
      ->excludes(noise);
  synth->add_option("--seed", synth_flags.seed, "generator seed")->capture_default_str();
  synth->add_option("--depth-format", synth_flags.depth_format, "csv or pgm16")->capture_default_str();
  synth->add_option("--threads", synth_flags.threads, "worker threads, 0 = all cores")->capture_default_str();

  PipelineFlags eval_pipeline;
  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "score a dataset and write accuracy tables");
  CLI::Option* dataset_opt = eval->add_option("dataset", eval_flags.dataset, "dataset directory written by synth");
  eval->add_option("--counts", eval_flags.counts, "print the rate of a prebuilt report (.json summary or .csv table)")
      ->excludes(dataset_opt);
  eval->add_option("--report", eval_flags.report, "output path prefix (default <dataset>/report)");
  eval->add_flag("--truth-landmarks", eval_flags.truth_landmarks, "classify generator landmarks instead of detected ones");
  eval->add_option("--threads", eval_flags.threads, "worker threads, 0 = all cores")->capture_default_str();
  eval_pipeline.add_to(*eval);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*detect) {
      detect_flags.finish();
      return cmd_detect(frontal_path, rotated_path, detect_flags, parse_output_format(format_name), out, err);
    }
    if (*landmarks) {
      landmark_flags.finish();
      return cmd_landmarks(input_path, landmark_flags, parse_output_format(format_name), out, err);
    }
    if (*synth) return cmd_synth(synth_flags, out);
    eval_pipeline.finish();
    return cmd_eval(eval_flags, eval_pipeline, out, err);
  } catch (const ParseError& e) {
    std::string where;
    if (e.line() > 0) where = " (line " + std::to_string(e.line()) + ")";
    return fail(err, kExitInput, e.what() + where);
  } catch (const Error& e) {
    return fail(err, kExitInput, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(err, kExitInput, e.what());
  }
}

}  // namespace facepose::cli
