#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ustrack/annotstore.hpp"
#include "ustrack/media.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

/// Displacement field d(p, t) = u(t) + (shear(t) * (p.y - shear_center_y), 0),
/// where u is the summed uniform part of every component. Frame times are
/// t / fps seconds.
struct MotionField {
  enum class Kind { translation, sinusoid, shear, composed };

  struct Component {
    Kind kind = Kind::translation;
    Point2 velocity;             // translation: px / frame
    double amplitude = 0.0;      // sinusoid: px
    double frequency_hz = 0.0;   // sinusoid
    Point2 axis{1.0, 0.0};       // sinusoid: unit direction
    double phase = 0.0;          // sinusoid: radians
    double shear_rate = 0.0;     // shear: x-displacement per px of y per frame
  };

  std::vector<Component> components;  // empty = static
  double shear_center_y = 0.0;

  static MotionField none() { return {}; }
  static MotionField translation(Point2 px_per_frame);
  static MotionField sinusoid(double amplitude_px, double frequency_hz, Point2 axis = {1.0, 0.0});
  static MotionField shear(double rate, double center_y);
  static MotionField composed(std::vector<MotionField> parts);

  Kind kind() const;
  Point2 displacement(Point2 p, double frame, double fps) const;
  /// d/dt of displacement in px per frame.
  Point2 velocity(Point2 p, double frame, double fps) const;
  /// Material point p0 whose displaced position at `frame` is `x`.
  Point2 source_of(Point2 x, double frame, double fps) const;

  void validate(double fps) const;
};

struct SpeckleParams {
  double blur_sigma = 1.5;  // px
  double contrast = 4.0;    // affine gain about 0.5 applied after blurring
  double base_noise = 0.0;  // unblurred uniform noise amplitude added on top
};

struct SynthSpec {
  int width = 64;
  int height = 64;
  int frames = 30;
  double fps = 50.0;
  std::uint64_t seed = 1;
  SpeckleParams speckle;
  MotionField motion;
  double sensor_noise = 0.0;  // Gaussian sigma, intensity units
  double mm_per_px_x = 1.0;
  double mm_per_px_y = 1.0;

  void validate() const;
};

/// Seeded generator with platform-independent uniform and normal draws
/// (std::mt19937_64 is fully specified; the std distributions are not).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);
  /// Independent stream for (seed, key), e.g. one per frame.
  SeededRng(std::uint64_t seed, std::uint64_t key);

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)

 private:
  std::mt19937_64 engine_;
};

/// Seeded uniform noise blurred with a Gaussian, stretched by `contrast` about
/// 0.5 and clamped into [0, 1]. `width` x `height` image.
Frame make_speckle(int width, int height, std::uint64_t seed, const SpeckleParams& params);
Frame make_speckle(const SynthSpec& spec);

struct SynthResult {
  FrameSequence sequence;
  AnnotationLayer truth;  // labels "0", "1", ... for the query points
};

/// Renders frames by inverse-warping a base speckle texture (bilinear) and
/// reports the Lagrangian truth P0 + d(P0, t) for each query point. Throws
/// ValidationError naming the first frame at which a point leaves the image.
SynthResult render_sequence(const SynthSpec& spec, const std::vector<Point2>& points,
                            const std::string& truth_layer = "truth");

/// Gaussian noise added to a trajectory (both axes), seeded.
Trajectory add_jitter(const Trajectory& traj, double sigma, std::uint64_t seed);

}  // namespace ustrack
