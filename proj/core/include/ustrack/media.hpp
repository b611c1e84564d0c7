#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ustrack/types.hpp"

namespace ustrack {

/// Grayscale image with intensities in [0, 1], row-major. Immutable once built.
class Frame {
 public:
  Frame() = default;
  Frame(int index, int width, int height, std::vector<float> intensities);

  int index() const { return index_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  // No bounds checking.
  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const float> data() const { return data_; }

  /// Same pixels under a different frame ordinal.
  Frame with_index(int index) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int index_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

struct Calibration {
  double mm_per_px_x = 1.0;
  double mm_per_px_y = 1.0;
  double fps = 50.0;

  /// Throws ContractError unless all three are strictly positive and finite.
  void validate() const;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// Ordered frames 0..N-1 of equal size plus their calibration.
class FrameSequence {
 public:
  FrameSequence() = default;
  FrameSequence(std::vector<Frame> frames, Calibration calibration);

  std::size_t size() const { return frames_.size(); }
  int count() const { return static_cast<int>(frames_.size()); }
  bool empty() const { return frames_.empty(); }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }
  const Frame& frame(int i) const;  // bounds-checked
  const std::vector<Frame>& frames() const { return frames_; }
  const Calibration& calibration() const { return calibration_; }
  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }

  /// Frames in reverse temporal order, re-indexed from 0.
  FrameSequence reversed() const;

  friend bool operator==(const FrameSequence&, const FrameSequence&) = default;

 private:
  std::vector<Frame> frames_;
  Calibration calibration_;
};

/// Contents of `manifest.json`. Geometry fields are required only for raw blobs.
struct Manifest {
  Calibration calibration;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<int> count;
};

/// Reads `dir/manifest.json` if present; absent fields keep their defaults.
Manifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

/// Loads either `frames.y8` (raw 8-bit luma, geometry from the manifest) or
/// numbered `frame_*.png` / `frame_*.pgm` files in lexicographic order.
FrameSequence open_sequence(const std::filesystem::path& dir);
FrameSequence open_sequence(const std::filesystem::path& dir, const Manifest& manifest);

enum class ImageFormat { png, pgm };

/// Writes `frame_%06d.<ext>` files plus manifest.json. Intensities are
/// quantized to 8 bits.
void write_sequence(const FrameSequence& seq, const std::filesystem::path& dir,
                    ImageFormat format = ImageFormat::png);

// Single-image codecs (8-bit gray; color PNGs are reduced with Rec.601 luma).
Frame decode_png(std::span<const std::uint8_t> bytes, int index = 0);
std::vector<std::uint8_t> encode_png(const Frame& frame);
Frame decode_pgm(std::span<const std::uint8_t> bytes, int index = 0);
std::vector<std::uint8_t> encode_pgm(const Frame& frame);

/// Bilinear interpolation with clamp-to-edge borders. Exact at grid nodes.
double sample_bilinear(const Frame& frame, Point2 p);

struct Gradient {
  double gx = 0.0;
  double gy = 0.0;
};

/// Central differences of bilinear samples, one pixel either side.
Gradient gradient(const Frame& frame, Point2 p);

struct Pyramid {
  std::vector<Frame> levels;  // levels[0] is the source frame

  int level_count() const { return static_cast<int>(levels.size()); }
};

/// Largest level count that keeps at least 8 px per axis on the top level.
int max_pyramid_levels(int width, int height);

/// 5-tap binomial blur then 2x decimation per level; `levels` is clamped to
/// max_pyramid_levels.
Pyramid build_pyramid(const Frame& frame, int levels);

}  // namespace ustrack
