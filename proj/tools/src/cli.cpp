#include "ustrack/tools/cli.hpp"

#include <pthread.h>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ustrack/annotstore.hpp"
#include "ustrack/error.hpp"
#include "ustrack/evalkit.hpp"
#include "ustrack/geometry.hpp"
#include "ustrack/jitterfilter.hpp"
#include "ustrack/synthgen.hpp"
#include "ustrack/tools/apiserver.hpp"

namespace ustrack::tools {

namespace fs = std::filesystem;

namespace {

// Flags shared by several subcommands.
struct LkFlags {
  int win = TrackConfig{}.win;
  int levels = TrackConfig{}.levels;

  void add(CLI::App* sub) {
    sub->add_option("--lk-win", win, "LK window side in px (odd)")->capture_default_str();
    sub->add_option("--lk-levels", levels, "LK pyramid levels")->capture_default_str();
  }
  TrackConfig config() const {
    TrackConfig cfg;
    cfg.win = win;
    cfg.levels = levels;
    cfg.validate();
    return cfg;
  }
};

struct CalibrationFlags {
  std::optional<fs::path> frames;
  std::vector<double> mm_per_px;
  std::optional<double> fps;

  void add(CLI::App* sub) {
    sub->add_option("--frames", frames, "Sequence directory whose manifest supplies the calibration")
        ->check(CLI::ExistingDirectory);
    sub->add_option("--mm-per-px", mm_per_px, "Pixel spacing X,Y in mm")->delimiter(',')->expected(2);
    sub->add_option("--fps", fps, "Frame rate in Hz");
  }
  Calibration resolve() const {
    Calibration cal = frames ? read_manifest(*frames).calibration : Calibration{};
    if (mm_per_px.size() == 2) {
      cal.mm_per_px_x = mm_per_px[0];
      cal.mm_per_px_y = mm_per_px[1];
    }
    if (fps) cal.fps = *fps;
    cal.validate();
    return cal;
  }
};

std::string layer_stem(const fs::path& path) {
  std::string name = path.filename().string();
  for (const char* ext : {".annot.json", ".json", ".csv"}) {
    const std::string e = ext;
    if (name.size() > e.size() && name.ends_with(e)) return name.substr(0, name.size() - e.size());
  }
  return path.stem().string();
}

AnnotationLayer restrict_labels(const AnnotationLayer& layer, const std::vector<std::string>& labels) {
  if (labels.empty()) return layer;
  AnnotationLayer out{layer.name, {}};
  for (const auto& id : labels) out.labels[id] = label_or_throw(layer, id);
  return out;
}

FrameRange parse_range(const std::string& text, int frames) {
  if (text.empty()) return {0, frames - 1};
  const auto colon = text.find(':');
  int a = 0, b = 0;
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    a = std::stoi(text.substr(0, colon));
    b = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--range", "expected FIRST:LAST, got '" + text + "'");
  }
  if (a < 0 || b >= frames || a > b) {
    throw ContractError("--range " + text + " outside frames 0.." + std::to_string(frames - 1));
  }
  return {a, b};
}

std::vector<Point2> parse_points(const std::string& text) {
  std::vector<Point2> pts;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.empty()) continue;
    const auto comma = item.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(item);
      pts.push_back({std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1))});
    } catch (const std::exception&) {
      throw CLI::ValidationError("--points", "expected \"x,y;x,y;...\", got '" + item + "'");
    }
  }
  return pts;
}

// -- subcommands --------------------------------------------------------------

struct SynthArgs {
  fs::path out;
  SynthSpec spec;
  std::vector<double> mm_per_px;
  std::vector<double> translate, sinusoid, shear;
  std::string points;
  std::string format = "png";
  double jitter = 0.0;
  std::uint64_t jitter_seed = 7;
};

int cmd_synth(const SynthArgs& a) {
  SynthSpec spec = a.spec;
  if (a.mm_per_px.size() == 2) {
    spec.mm_per_px_x = a.mm_per_px[0];
    spec.mm_per_px_y = a.mm_per_px[1];
  }
  std::vector<MotionField> parts;
  if (!a.translate.empty()) parts.push_back(MotionField::translation({a.translate[0], a.translate[1]}));
  if (!a.sinusoid.empty()) {
    Point2 axis{1.0, 0.0};
    if (a.sinusoid.size() == 4) axis = {a.sinusoid[2], a.sinusoid[3]};
    parts.push_back(MotionField::sinusoid(a.sinusoid[0], a.sinusoid[1], axis));
  }
  if (!a.shear.empty()) parts.push_back(MotionField::shear(a.shear[0], a.shear[1]));
  spec.motion = parts.size() == 1 ? parts.front() : MotionField::composed(parts);
  spec.validate();

  std::vector<Point2> pts = parse_points(a.points);
  if (pts.empty()) pts.push_back({(spec.width - 1) / 2.0, (spec.height - 1) / 2.0});

  if (fs::exists(a.out) && !(fs::is_directory(a.out) && fs::exists(a.out / "manifest.json"))) {
    throw ContractError("output " + a.out.string() + " exists and is not a sequence directory");
  }
  const SynthResult r = render_sequence(spec, pts);

  const fs::path tmp = a.out.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_sequence(r.sequence, tmp, a.format == "pgm" ? ImageFormat::pgm : ImageFormat::png);
  save_layer(r.truth, tmp / "truth.annot.json");
  if (a.jitter > 0.0) {
    AnnotationLayer model{"model", {}};
    std::uint64_t k = 0;
    for (const auto& [id, traj] : r.truth.labels) model.labels[id] = add_jitter(traj, a.jitter, a.jitter_seed + k++);
    save_layer(model, tmp / "model.annot.json");
  }
  fs::remove_all(a.out);
  fs::rename(tmp, a.out);
  return kExitOk;
}

struct TrackArgs {
  fs::path frames, layer, out;
  int from = 0;
  std::optional<int> to;
  std::vector<std::string> labels;
  LkFlags lk;
};

int cmd_track(const TrackArgs& a) {
  const TrackConfig cfg = a.lk.config();
  const FrameSequence seq = open_sequence(a.frames);
  const FrameBounds bounds = FrameBounds::of(seq);
  AnnotationLayer layer = load_layer(a.layer, bounds);
  const int to = a.to.value_or(seq.count() - 1);
  if (!bounds.contains_frame(a.from) || !bounds.contains_frame(to)) {
    throw ContractError("--from/--to must lie in [0, " + std::to_string(seq.count() - 1) + "]");
  }
  const AnnotationLayer input = restrict_labels(layer, a.labels);
  PyramidCache pyramids(seq, cfg.levels);
  for (const auto& [id, traj] : input.labels) {
    auto start = traj.find(a.from);
    if (start == traj.end()) {
      throw ContractError("label '" + id + "' has no point at frame " + std::to_string(a.from));
    }
    const TrackSegment seg = track_range(pyramids, start->second, a.from, to, cfg);
    int lost_at = -1;
    for (std::size_t k = 1; k < seg.points.size(); ++k) {
      const int f = seg.frame_at(k);
      if (seg.points[k].ok()) {
        layer.labels[id][f] = seg.points[k].p;
      } else if (lost_at < 0) {
        lost_at = f;
      }
    }
    if (lost_at >= 0) std::cerr << "ustrack track: label '" << id << "' lost at frame " << lost_at << "\n";
  }
  save_layer(layer, a.out);
  return kExitOk;
}

struct InterpArgs {
  fs::path frames, layer, out;
  std::string range;
  std::vector<std::string> labels;
  bool overwrite = false;
  double alpha = RstcConfig{}.alpha;
  LkFlags lk;
};

int cmd_interp(const InterpArgs& a) {
  RstcConfig cfg;
  cfg.alpha = a.alpha;
  cfg.track = a.lk.config();
  cfg.validate();
  const FrameSequence seq = open_sequence(a.frames);
  AnnotationLayer layer = load_layer(a.layer, FrameBounds::of(seq));
  const FrameRange range = parse_range(a.range, seq.count());
  int written = 0;
  if (a.labels.empty()) {
    written = interpolate_gaps(seq, layer, std::nullopt, range, cfg, a.overwrite);
  } else {
    for (const auto& id : a.labels) written += interpolate_gaps(seq, layer, id, range, cfg, a.overwrite);
  }
  save_layer(layer, a.out);
  std::cerr << "ustrack interp: wrote " << written << " points\n";
  return kExitOk;
}

struct FilterArgs {
  fs::path frames, layer, out;
  std::optional<int> window_frames;
  std::optional<double> window_seconds;
  double alpha = RstcConfig{}.alpha;
  std::vector<std::string> labels;
  LkFlags lk;
};

int cmd_filter(const FilterArgs& a) {
  const FrameSequence seq = open_sequence(a.frames);
  FilterConfig cfg;
  cfg.rstc.alpha = a.alpha;
  cfg.rstc.track = a.lk.config();
  if (a.window_frames) {
    cfg.window_frames = *a.window_frames;
  } else {
    cfg.window_frames = FilterConfig::window_from_seconds(a.window_seconds.value_or(0.6), seq.calibration().fps);
  }
  cfg.validate();
  const AnnotationLayer input = restrict_labels(load_layer(a.layer, FrameBounds::of(seq)), a.labels);
  save_layer(filter_layer(seq, input, cfg), a.out);
  return kExitOk;
}

struct MetricsArgs {
  fs::path layer, out;
  CalibrationFlags cal;
  std::vector<std::string> distances;
  std::optional<int> strain_ref;
  std::vector<std::string> area;
  std::vector<std::string> fascicle;
};

std::pair<std::string, std::string> label_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 == text.size()) {
    throw CLI::ValidationError("--distance", "expected A,B, got '" + text + "'");
  }
  return {text.substr(0, comma), text.substr(comma + 1)};
}

int cmd_metrics(const MetricsArgs& a) {
  const Calibration cal = a.cal.resolve();
  const AnnotationLayer layer = load_layer(a.layer);
  std::vector<MetricSeries> series;
  for (const auto& d : a.distances) {
    const auto [la, lb] = label_pair(d);
    series.push_back(distance_series(layer, la, lb, cal));
    if (a.strain_ref) series.push_back(deformation_series(series.back(), *a.strain_ref));
  }
  if (!a.area.empty()) series.push_back(area_series(layer, a.area, cal));
  if (!a.fascicle.empty()) {
    if (a.fascicle.size() != 5) throw CLI::ValidationError("--fascicle", "expected U1,U2,L1,L2,F");
    FascicleModel model{{a.fascicle[0], a.fascicle[1]}, {a.fascicle[2], a.fascicle[3]}, a.fascicle[4]};
    auto [length, pennation] = fascicle_series(layer, model, cal);
    series.push_back(std::move(length));
    series.push_back(std::move(pennation));
  }
  if (series.empty()) throw CLI::ValidationError("metrics", "request at least one of --distance, --area, --fascicle");
  const bool json = a.out.extension() == ".json";
  write_file_atomic(a.out, json ? metrics_to_json(series, cal.fps) : metrics_to_csv(series, cal.fps));
  return kExitOk;
}

struct EvalArgs {
  fs::path layer, truth;
  std::optional<fs::path> out, psd_out;
  std::vector<std::string> labels;
  CalibrationFlags cal;
  double cutoff = 1.5;
};

int cmd_eval(const EvalArgs& a) {
  const Calibration cal = a.cal.resolve();
  const AnnotationLayer layer = load_layer(a.layer);
  const AnnotationLayer truth = load_layer(a.truth);
  std::vector<std::string> ids = a.labels;
  if (ids.empty()) {
    for (const auto& [id, traj] : truth.labels) ids.push_back(id);
  }
  nlohmann::ordered_json report;
  report["layer"] = layer.name;
  report["truth"] = truth.name;
  report["fps"] = cal.fps;
  report["cutoff_hz"] = a.cutoff;
  report["labels"] = nlohmann::ordered_json::object();
  std::string psd_csv = "label,axis,freq_hz,power\n";
  double sum_rmse = 0.0;
  for (const auto& id : ids) {
    const Trajectory& est = label_or_throw(layer, id);
    const Trajectory& ref = label_or_throw(truth, id);
    nlohmann::ordered_json row;
    row["rmse_mm"] = rmse(est, ref, cal);
    row["jitter_mm"] = jitter_metric(est, cal.fps, cal, a.cutoff);
    row["truth_jitter_mm"] = jitter_metric(ref, cal.fps, cal, a.cutoff);
    sum_rmse += row["rmse_mm"].get<double>();
    report["labels"][id] = row;
    if (a.psd_out) {
      std::vector<double> xs, ys;
      for (const auto& [f, p] : est) {
        xs.push_back(p.x * cal.mm_per_px_x);
        ys.push_back(p.y * cal.mm_per_px_y);
      }
      const Spectrum sx = psd(xs, cal.fps), sy = psd(ys, cal.fps);
      for (std::size_t k = 0; k < sx.freqs.size(); ++k) {
        psd_csv += id + ",x," + nlohmann::json(sx.freqs[k]).dump() + "," + nlohmann::json(sx.power[k]).dump() + "\n";
      }
      for (std::size_t k = 0; k < sy.freqs.size(); ++k) {
        psd_csv += id + ",y," + nlohmann::json(sy.freqs[k]).dump() + "," + nlohmann::json(sy.power[k]).dump() + "\n";
      }
    }
  }
  report["mean_rmse_mm"] = ids.empty() ? 0.0 : sum_rmse / static_cast<double>(ids.size());
  const std::string text = report.dump(2) + "\n";
  if (a.out) {
    write_file_atomic(*a.out, text);
  } else {
    std::cerr << text;
  }
  if (a.psd_out) write_file_atomic(*a.psd_out, psd_csv);
  return kExitOk;
}

struct ServeArgs {
  fs::path frames;
  std::optional<fs::path> layers_dir, ui;
  int port = kDefaultPort;
};

int cmd_serve(const ServeArgs& a) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Session session(open_sequence(a.frames), a.layers_dir.value_or(a.frames));
  for (const auto& problem : session.autoload_layers()) std::cerr << "ustrack serve: skipped " << problem << "\n";
  ServerOptions opts;
  opts.port = a.port;
  opts.ui_dir = a.ui;
  ApiServer server(session, opts);
  const int port = server.bind();
  std::cerr << "ustrack serve: listening on http://127.0.0.1:" << port << "\n";

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });
  server.listen();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  session.wait_for_jobs();
  return kExitOk;
}

struct ImportArgs {
  fs::path csv, out;
  std::string name;
  std::optional<fs::path> frames;
};

int cmd_import(const ImportArgs& a) {
  std::ifstream in(a.csv, std::ios::binary);
  if (!in) throw LoadError("cannot open " + a.csv.string());
  std::stringstream buf;
  buf << in.rdbuf();
  AnnotationLayer layer;
  try {
    layer = import_keypoint_csv(buf.str(), a.name.empty() ? layer_stem(a.out) : a.name);
  } catch (const ParseError& e) {
    throw ParseError(a.csv.string() + ": " + e.what());
  }
  std::optional<FrameBounds> bounds;
  if (a.frames) bounds = FrameBounds::of(open_sequence(*a.frames));
  validate_layer(layer, bounds);
  save_layer(layer, a.out);
  return kExitOk;
}

struct ExportArgs {
  fs::path layer, out;
  int frame_count = 0;
};

int cmd_export(const ExportArgs& a) {
  write_file_atomic(a.out, export_keypoint_csv(load_layer(a.layer), a.frame_count));
  return kExitOk;
}

struct TrimArgs {
  fs::path layer, out;
  std::vector<std::string> expected;
};

int cmd_trim(const TrimArgs& a) {
  AnnotationLayer layer = load_layer(a.layer);
  std::set<std::string, LabelLess> expected(a.expected.begin(), a.expected.end());
  if (expected.empty()) {
    for (const auto& [id, traj] : layer.labels) expected.insert(id);
  }
  for (const auto& id : expected) label_or_throw(layer, id);
  if (expected.empty()) throw ContractError(a.layer.string() + ": layer has no labels to trim against");
  const auto removed = trim(layer, expected);
  save_layer(layer, a.out);
  std::cerr << "ustrack trim: removed " << removed.size() << " frames\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Ultrasound point tracking: synthesize, track, interpolate, filter, measure, evaluate, serve."};
  app.name(args.empty() ? "ustrack" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::function<int()> action;

  SynthArgs synth;
  {
    auto* sub = app.add_subcommand("synth", "Render a synthetic speckle sequence plus its truth layer");
    auto& s = synth.spec;
    sub->add_option("--out", synth.out, "Output sequence directory")->required();
    sub->add_option("--width", s.width)->capture_default_str();
    sub->add_option("--height", s.height)->capture_default_str();
    sub->add_option("--frames", s.frames)->capture_default_str();
    sub->add_option("--fps", s.fps)->capture_default_str();
    sub->add_option("--seed", s.seed)->capture_default_str();
    sub->add_option("--blur-sigma", s.speckle.blur_sigma)->capture_default_str();
    sub->add_option("--contrast", s.speckle.contrast)->capture_default_str();
    sub->add_option("--base-noise", s.speckle.base_noise)->capture_default_str();
    sub->add_option("--sensor-noise", s.sensor_noise, "Gaussian noise sigma per frame")->capture_default_str();
    sub->add_option("--mm-per-px", synth.mm_per_px, "Pixel spacing X,Y")->delimiter(',')->expected(2);
    sub->add_option("--translate", synth.translate, "Velocity VX,VY in px/frame")->delimiter(',')->expected(2);
    sub->add_option("--sinusoid", synth.sinusoid, "AMP,FREQ[,AX,AY]")->delimiter(',')->expected(2, 4);
    sub->add_option("--shear", synth.shear, "RATE,CENTER_Y")->delimiter(',')->expected(2);
    sub->add_option("--points", synth.points, "Query points \"x,y;x,y\" (default: image centre)");
    sub->add_option("--format", synth.format)->check(CLI::IsMember({"png", "pgm"}))->capture_default_str();
    sub->add_option("--jitter", synth.jitter, "Also write model.annot.json: truth plus N(0, sigma^2) jitter");
    sub->add_option("--jitter-seed", synth.jitter_seed)->capture_default_str();
    sub->callback([&] { action = [&] { return cmd_synth(synth); }; });
  }

  TrackArgs track;
  {
    auto* sub = app.add_subcommand("track", "Track labelled points with pyramidal LK");
    sub->add_option("--frames", track.frames)->required()->check(CLI::ExistingDirectory);
    sub->add_option("--layer", track.layer, "Layer holding the start points")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", track.out)->required();
    sub->add_option("--from", track.from, "Start frame")->capture_default_str();
    sub->add_option("--to", track.to, "End frame (default: last; may be earlier than --from)");
    sub->add_option("--labels", track.labels, "Label ids A,B,...")->delimiter(',');
    track.lk.add(sub);
    sub->callback([&] { action = [&] { return cmd_track(track); }; });
  }

  InterpArgs interp;
  {
    auto* sub = app.add_subcommand("interp", "Fill gaps between annotated frames with LK-RSTC tracklets");
    sub->add_option("--frames", interp.frames)->required()->check(CLI::ExistingDirectory);
    sub->add_option("--layer", interp.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", interp.out)->required();
    sub->add_option("--range", interp.range, "FIRST:LAST (default: whole sequence)");
    sub->add_option("--labels", interp.labels)->delimiter(',');
    sub->add_flag("--overwrite", interp.overwrite, "Regenerate every frame between the outermost anchors");
    sub->add_option("--alpha", interp.alpha)->capture_default_str();
    interp.lk.add(sub);
    sub->callback([&] { action = [&] { return cmd_interp(interp); }; });
  }

  FilterArgs filter;
  {
    auto* sub = app.add_subcommand("filter", "Sliding-window LK-RSTC jitter filter");
    sub->add_option("--frames", filter.frames)->required()->check(CLI::ExistingDirectory);
    sub->add_option("--layer", filter.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", filter.out)->required();
    auto* wf = sub->add_option("--window-frames", filter.window_frames, "Window W in frames");
    auto* ws = sub->add_option("--window-seconds", filter.window_seconds, "Window in seconds (default 0.6)");
    wf->excludes(ws);
    ws->excludes(wf);
    sub->add_option("--alpha", filter.alpha)->capture_default_str();
    sub->add_option("--labels", filter.labels)->delimiter(',');
    filter.lk.add(sub);
    sub->callback([&] { action = [&] { return cmd_filter(filter); }; });
  }

  MetricsArgs metrics;
  {
    auto* sub = app.add_subcommand("metrics", "Distances, strain, area and fascicle geometry");
    sub->add_option("--layer", metrics.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", metrics.out, "Output .csv or .json")->required();
    metrics.cal.add(sub);
    sub->add_option("--distance", metrics.distances, "Label pair A,B (repeatable)")->take_all();
    sub->add_option("--strain-ref", metrics.strain_ref, "Reference frame for strain of each distance");
    sub->add_option("--area", metrics.area, "Polygon labels A,B,C,...")->delimiter(',');
    sub->add_option("--fascicle", metrics.fascicle, "Labels U1,U2,L1,L2,F")->delimiter(',');
    sub->callback([&] { action = [&] { return cmd_metrics(metrics); }; });
  }

  EvalArgs eval;
  {
    auto* sub = app.add_subcommand("eval", "RMSE, jitter and PSD of a layer against truth");
    sub->add_option("--layer", eval.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--truth", eval.truth)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", eval.out, "Scalar metrics JSON");
    sub->add_option("--psd-out", eval.psd_out, "Welch PSD CSV (label,axis,freq_hz,power)");
    sub->add_option("--labels", eval.labels)->delimiter(',');
    sub->add_option("--cutoff", eval.cutoff, "High-pass cutoff of the jitter metric in Hz")->capture_default_str();
    eval.cal.add(sub);
    sub->callback([&] { action = [&] { return cmd_eval(eval); }; });
  }

  ServeArgs serve;
  {
    auto* sub = app.add_subcommand("serve", "Local HTTP API for the annotation UI");
    sub->add_option("--frames", serve.frames)->required()->check(CLI::ExistingDirectory);
    sub->add_option("--layers-dir", serve.layers_dir, "Directory of *.annot.json (default: --frames)")
        ->check(CLI::ExistingDirectory);
    sub->add_option("--port", serve.port)->capture_default_str()->check(CLI::Range(0, 65535));
    sub->add_option("--ui", serve.ui, "Static UI bundle served at /")->check(CLI::ExistingDirectory);
    sub->callback([&] { action = [&] { return cmd_serve(serve); }; });
  }

  ImportArgs import;
  {
    auto* sub = app.add_subcommand("import-csv", "Convert a keypoint CSV into a layer");
    sub->add_option("--csv", import.csv)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", import.out)->required();
    sub->add_option("--name", import.name, "Layer name (default: output file stem)");
    sub->add_option("--frames", import.frames, "Validate points against this sequence")
        ->check(CLI::ExistingDirectory);
    sub->callback([&] { action = [&] { return cmd_import(import); }; });
  }

  ExportArgs exp;
  {
    auto* sub = app.add_subcommand("export-csv", "Write a layer as keypoint CSV");
    sub->add_option("--layer", exp.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", exp.out)->required();
    sub->add_option("--frame-count", exp.frame_count, "Rows to emit (default: last annotated frame + 1)");
    sub->callback([&] { action = [&] { return cmd_export(exp); }; });
  }

  TrimArgs trim_args;
  {
    auto* sub = app.add_subcommand("trim", "Drop frames where any expected label is missing");
    sub->add_option("--layer", trim_args.layer)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", trim_args.out)->required();
    sub->add_option("--expected", trim_args.expected, "Label ids (default: every label)")->delimiter(',');
    sub->callback([&] { action = [&] { return cmd_trim(trim_args); }; });
  }

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) argv.push_back("ustrack");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return action();
  } catch (const CLI::Error& e) {
    std::cerr << "ustrack " << sub << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ustrack " << sub << ": error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace ustrack::tools
