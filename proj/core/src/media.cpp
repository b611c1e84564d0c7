#include "ustrack/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ustrack/error.hpp"

namespace ustrack {

namespace fs = std::filesystem;

Frame::Frame(int index, int width, int height, std::vector<float> intensities)
    : index_(index), width_(width), height_(height), data_(std::move(intensities)) {
  if (index < 0 || width < 0 || height < 0) {
    throw ContractError("frame index and dimensions must be non-negative");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw StructuralError("frame " + std::to_string(index) + ": expected " +
                          std::to_string(static_cast<long long>(width) * height) +
                          " intensities, got " + std::to_string(data_.size()));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ContractError("frame " + std::to_string(index) + ": intensity outside [0,1]");
    }
  }
}

Frame Frame::with_index(int index) const {
  Frame copy = *this;
  copy.index_ = index;
  return copy;
}

void Calibration::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(mm_per_px_x) || !positive(mm_per_px_y) || !positive(fps)) {
    throw ContractError("calibration values (mm_per_px, fps) must be strictly positive");
  }
}

FrameSequence::FrameSequence(std::vector<Frame> frames, Calibration calibration)
    : frames_(std::move(frames)), calibration_(calibration) {
  calibration_.validate();
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (frames_[i].index() != static_cast<int>(i)) {
      throw StructuralError("frame indices must be contiguous from 0; slot " + std::to_string(i) +
                            " holds frame " + std::to_string(frames_[i].index()));
    }
    if (frames_[i].width() != frames_[0].width() || frames_[i].height() != frames_[0].height()) {
      throw StructuralError("frame " + std::to_string(i) + " is " +
                            std::to_string(frames_[i].width()) + "x" +
                            std::to_string(frames_[i].height()) + ", expected " +
                            std::to_string(frames_[0].width()) + "x" +
                            std::to_string(frames_[0].height()));
    }
  }
}

const Frame& FrameSequence::frame(int i) const {
  if (i < 0 || i >= count()) {
    throw NotFoundError("frame " + std::to_string(i) + " out of range [0, " +
                        std::to_string(count() - 1) + "]");
  }
  return frames_[static_cast<std::size_t>(i)];
}

FrameSequence FrameSequence::reversed() const {
  std::vector<Frame> out;
  out.reserve(frames_.size());
  for (std::size_t i = frames_.size(); i-- > 0;) {
    out.push_back(frames_[i].with_index(static_cast<int>(out.size())));
  }
  return FrameSequence(std::move(out), calibration_);
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_frame_name(const fs::path& p) {
  const auto name = p.filename().string();
  const auto ext = p.extension().string();
  return name.rfind("frame_", 0) == 0 && (ext == ".png" || ext == ".pgm");
}

}  // namespace

Manifest read_manifest(const fs::path& dir) {
  Manifest m;
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) return m;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (j.contains("fps")) m.calibration.fps = j.at("fps").get<double>();
    if (j.contains("mm_per_px")) {
      const auto& mm = j.at("mm_per_px");
      if (!mm.is_array() || mm.size() != 2) {
        throw ParseError(path.string() + ": mm_per_px must be a two-element array");
      }
      m.calibration.mm_per_px_x = mm[0].get<double>();
      m.calibration.mm_per_px_y = mm[1].get<double>();
    }
    if (j.contains("width")) m.width = j.at("width").get<int>();
    if (j.contains("height")) m.height = j.at("height").get<int>();
    if (j.contains("count")) m.count = j.at("count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  m.calibration.validate();
  return m;
}

void write_manifest(const fs::path& dir, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["fps"] = manifest.calibration.fps;
  j["mm_per_px"] = {manifest.calibration.mm_per_px_x, manifest.calibration.mm_per_px_y};
  if (manifest.width) j["width"] = *manifest.width;
  if (manifest.height) j["height"] = *manifest.height;
  if (manifest.count) j["count"] = *manifest.count;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
}

FrameSequence open_sequence(const fs::path& dir) { return open_sequence(dir, read_manifest(dir)); }

FrameSequence open_sequence(const fs::path& dir, const Manifest& manifest) {
  if (!fs::is_directory(dir)) throw LoadError(dir.string() + " is not a directory");

  const auto raw = dir / "frames.y8";
  if (fs::exists(raw)) {
    if (!manifest.width || !manifest.height || !manifest.count) {
      throw StructuralError(raw.string() + ": manifest must declare width, height and count");
    }
    const int w = *manifest.width, h = *manifest.height, n = *manifest.count;
    if (w <= 0 || h <= 0 || n <= 0) {
      throw StructuralError("manifest width/height/count must be positive");
    }
    const auto bytes = read_file(raw);
    const std::size_t plane = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() != plane * static_cast<std::size_t>(n)) {
      throw StructuralError(raw.string() + ": expected " + std::to_string(plane * n) +
                            " bytes for " + std::to_string(n) + " frames of " + std::to_string(w) +
                            "x" + std::to_string(h) + ", found " + std::to_string(bytes.size()));
    }
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::vector<float> px(plane);
      const auto* src = bytes.data() + plane * static_cast<std::size_t>(i);
      for (std::size_t k = 0; k < plane; ++k) px[k] = static_cast<float>(src[k]) / 255.0f;
      frames.emplace_back(i, w, h, std::move(px));
    }
    return FrameSequence(std::move(frames), manifest.calibration);
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_frame_name(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw LoadError(dir.string() + ": no frame_*.png or frame_*.pgm files");

  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const int index = static_cast<int>(i);
    try {
      const auto bytes = read_file(files[i]);
      frames.push_back(files[i].extension() == ".png" ? decode_png(bytes, index)
                                                      : decode_pgm(bytes, index));
    } catch (const StructuralError&) {
      throw;
    } catch (const Error& e) {
      throw LoadError("frame " + std::to_string(index) + " (" + files[i].filename().string() +
                      "): " + e.what());
    }
  }
  return FrameSequence(std::move(frames), manifest.calibration);
}

void write_sequence(const FrameSequence& seq, const fs::path& dir, ImageFormat format) {
  fs::create_directories(dir);
  char name[32];
  for (const auto& frame : seq.frames()) {
    const bool png = format == ImageFormat::png;
    std::snprintf(name, sizeof name, "frame_%06d.%s", frame.index(), png ? "png" : "pgm");
    const auto bytes = png ? encode_png(frame) : encode_pgm(frame);
    std::ofstream out(dir / name, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + (dir / name).string());
  }
  Manifest m;
  m.calibration = seq.calibration();
  write_manifest(dir, m);
}

// ---------------------------------------------------------------------------
// Sampling

double sample_bilinear(const Frame& frame, Point2 p) {
  const int w = frame.width(), h = frame.height();
  if (!std::isfinite(p.x)) p.x = 0.0;
  if (!std::isfinite(p.y)) p.y = 0.0;
  const double fx0 = std::floor(p.x), fy0 = std::floor(p.y);
  const double fx = p.x - fx0, fy = p.y - fy0;
  const int x0 = static_cast<int>(std::clamp(fx0, -1.0, static_cast<double>(w)));
  const int y0 = static_cast<int>(std::clamp(fy0, -1.0, static_cast<double>(h)));
  const int xa = std::clamp(x0, 0, w - 1), xb = std::clamp(x0 + 1, 0, w - 1);
  const int ya = std::clamp(y0, 0, h - 1), yb = std::clamp(y0 + 1, 0, h - 1);
  const double a = frame.at(xa, ya), b = frame.at(xb, ya);
  const double c = frame.at(xa, yb), d = frame.at(xb, yb);
  const double top = a + fx * (b - a);
  const double bottom = c + fx * (d - c);
  return top + fy * (bottom - top);
}

Gradient gradient(const Frame& frame, Point2 p) {
  return {(sample_bilinear(frame, {p.x + 1.0, p.y}) - sample_bilinear(frame, {p.x - 1.0, p.y})) / 2.0,
          (sample_bilinear(frame, {p.x, p.y + 1.0}) - sample_bilinear(frame, {p.x, p.y - 1.0})) / 2.0};
}

// ---------------------------------------------------------------------------
// Pyramid

int max_pyramid_levels(int width, int height) {
  const int smallest = std::min(width, height);
  int levels = 1;
  while ((1 << levels) * 8 <= smallest) ++levels;
  return levels;
}

namespace {

Frame blur_decimate(const Frame& src, int index) {
  const int w = src.width(), h = src.height();
  const int nw = (w + 1) / 2, nh = (h + 1) / 2;
  constexpr float k[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

  std::vector<float> rows(static_cast<std::size_t>(h) * nw);
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < nw; ++i) {
      const int x = 2 * i;
      float acc = 0.0f;
      for (int t = -2; t <= 2; ++t) acc += k[t + 2] * src.at(std::clamp(x + t, 0, w - 1), y);
      rows[static_cast<std::size_t>(y) * nw + i] = acc;
    }
  }
  std::vector<float> out(static_cast<std::size_t>(nh) * nw);
  for (int j = 0; j < nh; ++j) {
    const int y = 2 * j;
    for (int i = 0; i < nw; ++i) {
      float acc = 0.0f;
      for (int t = -2; t <= 2; ++t) {
        acc += k[t + 2] * rows[static_cast<std::size_t>(std::clamp(y + t, 0, h - 1)) * nw + i];
      }
      out[static_cast<std::size_t>(j) * nw + i] = std::clamp(acc, 0.0f, 1.0f);
    }
  }
  return Frame(index, nw, nh, std::move(out));
}

}  // namespace

Pyramid build_pyramid(const Frame& frame, int levels) {
  if (levels < 1) throw ContractError("pyramid needs at least one level");
  levels = std::min(levels, max_pyramid_levels(frame.width(), frame.height()));
  Pyramid pyr;
  pyr.levels.reserve(static_cast<std::size_t>(levels));
  pyr.levels.push_back(frame);
  for (int l = 1; l < levels; ++l) pyr.levels.push_back(blur_decimate(pyr.levels.back(), frame.index()));
  return pyr;
}

}  // namespace ustrack
