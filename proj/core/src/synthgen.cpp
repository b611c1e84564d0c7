#include "ustrack/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ustrack/error.hpp"
#include "ustrack/parallel.hpp"

namespace ustrack {

// ---------------------------------------------------------------------------
// Random numbers

SeededRng::SeededRng(std::uint64_t seed) : SeededRng(seed, 0) {}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  engine_.seed(seq);
}

double SeededRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SeededRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// Motion

MotionField MotionField::translation(Point2 px_per_frame) {
  Component c;
  c.kind = Kind::translation;
  c.velocity = px_per_frame;
  return {{c}, 0.0};
}

MotionField MotionField::sinusoid(double amplitude_px, double frequency_hz, Point2 axis) {
  const double n = norm(axis);
  if (!(n > 0.0)) throw ContractError("sinusoid axis must be non-zero");
  Component c;
  c.kind = Kind::sinusoid;
  c.amplitude = amplitude_px;
  c.frequency_hz = frequency_hz;
  c.axis = axis * (1.0 / n);
  return {{c}, 0.0};
}

MotionField MotionField::shear(double rate, double center_y) {
  Component c;
  c.kind = Kind::shear;
  c.shear_rate = rate;
  return {{c}, center_y};
}

MotionField MotionField::composed(std::vector<MotionField> parts) {
  MotionField out;
  for (auto& p : parts) {
    for (auto& c : p.components) {
      if (c.kind == Kind::shear) out.shear_center_y = p.shear_center_y;
      out.components.push_back(c);
    }
  }
  return out;
}

MotionField::Kind MotionField::kind() const {
  if (components.size() > 1) return Kind::composed;
  return components.empty() ? Kind::translation : components.front().kind;
}

namespace {

struct FieldTerms {
  Point2 uniform;
  double shear = 0.0;  // x-displacement per px of (y - center)
};

FieldTerms terms(const MotionField& m, double t, double fps) {
  FieldTerms out;
  for (const auto& c : m.components) {
    switch (c.kind) {
      case MotionField::Kind::translation:
        out.uniform = out.uniform + t * c.velocity;
        break;
      case MotionField::Kind::sinusoid:
        out.uniform = out.uniform +
                      c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency_hz * t / fps + c.phase) *
                          c.axis;
        break;
      case MotionField::Kind::shear:
        out.shear += c.shear_rate * t;
        break;
      case MotionField::Kind::composed:
        break;
    }
  }
  return out;
}

}  // namespace

Point2 MotionField::displacement(Point2 p, double frame, double fps) const {
  const FieldTerms f = terms(*this, frame, fps);
  return f.uniform + Point2{f.shear * (p.y - shear_center_y), 0.0};
}

Point2 MotionField::velocity(Point2 p, double frame, double fps) const {
  Point2 v;
  for (const auto& c : components) {
    switch (c.kind) {
      case Kind::translation:
        v = v + c.velocity;
        break;
      case Kind::sinusoid: {
        const double w = 2.0 * std::numbers::pi * c.frequency_hz / fps;
        v = v + c.amplitude * w * std::cos(w * frame + c.phase) * c.axis;
        break;
      }
      case Kind::shear:
        v = v + Point2{c.shear_rate * (p.y - shear_center_y), 0.0};
        break;
      case Kind::composed:
        break;
    }
  }
  return v;
}

Point2 MotionField::source_of(Point2 x, double frame, double fps) const {
  const FieldTerms f = terms(*this, frame, fps);
  const double y0 = x.y - f.uniform.y;
  return {x.x - f.uniform.x - f.shear * (y0 - shear_center_y), y0};
}

void MotionField::validate(double fps) const {
  for (const auto& c : components) {
    if (c.kind == Kind::sinusoid && !(c.frequency_hz >= 0.0 && c.frequency_hz < fps / 2.0)) {
      throw ContractError("sinusoid frequency must be in [0, fps/2)");
    }
    if (c.kind == Kind::composed) throw ContractError("composed is not a component kind");
  }
}

void SynthSpec::validate() const {
  if (width < 8 || height < 8) throw ContractError("synthetic frames must be at least 8x8");
  if (frames < 1) throw ContractError("synthetic sequence needs at least one frame");
  if (!(fps > 0.0)) throw ContractError("fps must be > 0");
  if (!(speckle.blur_sigma > 0.0)) throw ContractError("speckle blur sigma must be > 0");
  if (!(sensor_noise >= 0.0) || !(speckle.base_noise >= 0.0)) {
    throw ContractError("noise levels must be >= 0");
  }
  Calibration{mm_per_px_x, mm_per_px_y, fps}.validate();
  motion.validate(fps);
}

// ---------------------------------------------------------------------------
// Rendering

Frame make_speckle(int width, int height, std::uint64_t seed, const SpeckleParams& params) {
  if (width < 1 || height < 1) throw ContractError("speckle size must be positive");
  if (!(params.blur_sigma > 0.0)) throw ContractError("speckle blur sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * params.blur_sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (params.blur_sigma * params.blur_sigma));
    ksum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= ksum;

  // Noise covers the blur footprint of every output pixel, so the border
  // statistics match the interior.
  const int cw = width + 2 * radius, ch = height + 2 * radius;
  SeededRng rng(seed);
  std::vector<double> noise(static_cast<std::size_t>(cw) * ch);
  for (auto& v : noise) v = rng.uniform();
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> fine(n, 0.0);
  if (params.base_noise > 0.0) {
    for (auto& v : fine) v = rng.uniform() - 0.5;
  }

  std::vector<double> rows(static_cast<std::size_t>(ch) * width);  // x-blurred, full height
  for (int y = 0; y < ch; ++y) {
    const double* src = noise.data() + static_cast<std::size_t>(y) * cw;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = 0; i <= 2 * radius; ++i) acc += kernel[i] * src[x + i];
      rows[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  std::vector<float> px(n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = 0; i <= 2 * radius; ++i) acc += kernel[i] * rows[static_cast<std::size_t>(y + i) * width + x];
      const std::size_t k = static_cast<std::size_t>(y) * width + x;
      const double v = 0.5 + params.contrast * (acc - 0.5) + params.base_noise * fine[k];
      px[k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return Frame(0, width, height, std::move(px));
}

Frame make_speckle(const SynthSpec& spec) {
  return make_speckle(spec.width, spec.height, spec.seed, spec.speckle);
}

SynthResult render_sequence(const SynthSpec& spec, const std::vector<Point2>& points,
                            const std::string& truth_layer) {
  spec.validate();
  const double w1 = spec.width - 1, h1 = spec.height - 1;

  AnnotationLayer truth;
  truth.name = truth_layer;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Trajectory& traj = truth.labels[std::to_string(i)];
    for (int t = 0; t < spec.frames; ++t) {
      const Point2 p = points[i] + spec.motion.displacement(points[i], t, spec.fps);
      if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= w1 && p.y <= h1)) {
        throw ValidationError("point " + std::to_string(i) + " leaves the image at frame " +
                              std::to_string(t));
      }
      traj[t] = p;
    }
  }

  // Base texture large enough that every inverse-mapped pixel lands inside it.
  double lo_x = 0.0, lo_y = 0.0, hi_x = w1, hi_y = h1;
  for (int t = 0; t < spec.frames; ++t) {
    for (Point2 c : {Point2{0, 0}, Point2{w1, 0}, Point2{0, h1}, Point2{w1, h1}}) {
      const Point2 s = spec.motion.source_of(c, t, spec.fps);
      lo_x = std::min(lo_x, s.x);
      lo_y = std::min(lo_y, s.y);
      hi_x = std::max(hi_x, s.x);
      hi_y = std::max(hi_y, s.y);
    }
  }
  const Point2 origin{std::floor(lo_x) - 2.0, std::floor(lo_y) - 2.0};
  const int bw = static_cast<int>(std::ceil(hi_x) - origin.x) + 3;
  const int bh = static_cast<int>(std::ceil(hi_y) - origin.y) + 3;
  const Frame base = make_speckle(bw, bh, spec.seed, spec.speckle);

  std::vector<Frame> frames(static_cast<std::size_t>(spec.frames));
  parallel_for(frames.size(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    SeededRng rng(spec.seed, static_cast<std::uint64_t>(t) + 1);
    std::vector<float> px(static_cast<std::size_t>(spec.width) * spec.height);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const Point2 src = spec.motion.source_of({double(x), double(y)}, t, spec.fps) - origin;
        double v = sample_bilinear(base, src);
        if (spec.sensor_noise > 0.0) v += spec.sensor_noise * rng.normal();
        px[static_cast<std::size_t>(y) * spec.width + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
    frames[ti] = Frame(t, spec.width, spec.height, std::move(px));
  });

  return {FrameSequence(std::move(frames), Calibration{spec.mm_per_px_x, spec.mm_per_px_y, spec.fps}),
          std::move(truth)};
}

Trajectory add_jitter(const Trajectory& traj, double sigma, std::uint64_t seed) {
  Trajectory out;
  for (const auto& [f, p] : traj) {
    SeededRng rng(seed, static_cast<std::uint64_t>(f));
    const double dx = sigma * rng.normal();
    const double dy = sigma * rng.normal();
    out[f] = {p.x + dx, p.y + dy};
  }
  return out;
}

}  // namespace ustrack
