#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "ustrack/flow.hpp"
#include "ustrack/media.hpp"
#include "ustrack/rstc.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

/// Orders label ids numerically when both are decimal ("2" < "10"), otherwise
/// lexicographically; numeric ids sort first.
struct LabelLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

using LabelMap = std::map<std::string, Trajectory, LabelLess>;

struct AnnotationLayer {
  std::string name;
  LabelMap labels;

  friend bool operator==(const AnnotationLayer&, const AnnotationLayer&) = default;
};

/// Frame geometry used to validate points and frame indices.
struct FrameBounds {
  int width = 0;
  int height = 0;
  int count = 0;

  static FrameBounds of(const FrameSequence& seq) { return {seq.width(), seq.height(), seq.count()}; }
  bool contains_frame(int f) const { return f >= 0 && f < count; }
  bool contains(Point2 p) const {
    return is_finite(p) && p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1;
  }
};

/// Inclusive frame interval.
struct FrameRange {
  int first = 0;
  int last = 0;

  bool contains(int f) const { return f >= first && f <= last; }
};

// -- layer edits -------------------------------------------------------------

Trajectory& label_or_throw(AnnotationLayer& layer, const std::string& label);
const Trajectory& label_or_throw(const AnnotationLayer& layer, const std::string& label);

/// Overwrites silently. Throws NotFoundError for an undeclared label and
/// ValidationError for out-of-range frames or points.
void set_point(AnnotationLayer& layer, const std::string& label, int frame, Point2 p,
               const FrameBounds& bounds);
/// Removing an absent entry is a no-op. Returns whether a point was removed.
bool remove_point(AnnotationLayer& layer, const std::string& label, int frame);
std::optional<Point2> get_point(const AnnotationLayer& layer, const std::string& label, int frame);

/// Frames carrying at least one point in any label, ascending.
std::vector<int> annotated_frames(const AnnotationLayer& layer);

/// Removes every frame at which some expected label has no point, from all
/// labels. Returns the removed frames, ascending.
std::vector<int> trim(AnnotationLayer& layer, const std::set<std::string, LabelLess>& expected);

/// Copies points with frames in `range` from `src` into `dst`, overwriting
/// collisions. `label` empty means every label. Dst labels are created on the first
/// copied point.
void copy_range(const AnnotationLayer& src, AnnotationLayer& dst,
                const std::optional<std::string>& label, FrameRange range);

/// Removes the points of `label` (or all labels) inside `range`; returns the count.
int remove_range(AnnotationLayer& layer, const std::optional<std::string>& label, FrameRange range);

// -- LK-assisted edits -------------------------------------------------------

/// LK proposal for `target` tracked from the nearest annotated frame of
/// `label` (ties go to the earlier frame). Never mutates the layer.
TrackedPoint guess(const FrameSequence& seq, const AnnotationLayer& layer, const std::string& label,
                   int target, const TrackConfig& cfg);

/// Fills the frames between consecutive annotated frames of `label` (or of
/// every label) inside `range` with LK-RSTC tracklet estimates. With
/// `overwrite`, only the outermost annotated frames in range act as anchors
/// and every frame between them is regenerated. Returns the number of points
/// written.
int interpolate_gaps(const FrameSequence& seq, AnnotationLayer& layer,
                     const std::optional<std::string>& label, FrameRange range,
                     const RstcConfig& cfg, bool overwrite = false);

// -- persistence -------------------------------------------------------------

inline constexpr const char* kLayerSchema = "ustrack-layer/1";

/// Canonical JSON: labels and frames in LabelLess / numeric order, shortest
/// round-trip decimals. Byte-deterministic.
std::string serialize_layer(const AnnotationLayer& layer);
/// Throws ParseError (with location), VersionError, or ValidationError.
AnnotationLayer parse_layer(const std::string& text, const std::optional<FrameBounds>& bounds = {});

/// Writes atomically via a temporary sibling file and rename.
void save_layer(const AnnotationLayer& layer, const std::filesystem::path& path);
AnnotationLayer load_layer(const std::filesystem::path& path,
                           const std::optional<FrameBounds>& bounds = {});

/// Throws ValidationError naming the first offending label/frame.
void validate_layer(const AnnotationLayer& layer, const std::optional<FrameBounds>& bounds);

/// Writes `text` to `path` through a temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// -- keypoint CSV interchange ------------------------------------------------

/// Three header rows (scorer / bodyparts / coords) then one row per frame with
/// x,y[,likelihood] per label. Empty cells mean "no point".
AnnotationLayer import_keypoint_csv(const std::string& text, const std::string& layer_name);
/// Exports frames 0..frame_count-1 (or the max annotated frame when 0).
std::string export_keypoint_csv(const AnnotationLayer& layer, int frame_count = 0);

// -- store -------------------------------------------------------------------

/// Named layers plus UI cursor state. Every mutation gives the layer a fresh
/// store-wide revision and records an undo snapshot (depth 100).
class AnnotationStore {
 public:
  static constexpr std::size_t kUndoDepth = 100;

  bool has_layer(const std::string& name) const { return layers_.count(name) != 0; }
  std::vector<std::string> layer_names() const;
  const AnnotationLayer& layer(const std::string& name) const;
  std::uint64_t revision(const std::string& name) const;

  /// Throws ContractError if the name is empty or taken.
  void add_layer(AnnotationLayer layer);
  /// Adds or replaces.
  void put_layer(AnnotationLayer layer);
  void remove_layer(const std::string& name);

  /// Applies `edit` to the named layer under undo/revision bookkeeping.
  /// The edit's return value is passed through.
  template <typename Edit>
  auto mutate(const std::string& name, Edit&& edit) {
    Entry& e = entry(name);
    AnnotationLayer before = e.layer;
    auto commit = [&] {
      push_undo(name, std::move(before));
      e.revision = ++clock_;
    };
    try {
      if constexpr (std::is_void_v<decltype(edit(e.layer))>) {
        edit(e.layer);
        commit();
      } else {
        auto result = edit(e.layer);
        commit();
        return result;
      }
    } catch (...) {
      e.layer = std::move(before);
      throw;
    }
  }

  /// Reverts the most recent mutation; false when history is empty.
  bool undo();
  std::size_t undo_depth() const { return undo_.size(); }

  // Selections. primary != overlay when both set; they must name existing layers.
  const std::optional<std::string>& primary_layer() const { return primary_; }
  const std::optional<std::string>& overlay_layer() const { return overlay_; }
  void select_primary(std::optional<std::string> name);
  void select_overlay(std::optional<std::string> name);
  const std::string& current_label() const { return current_label_; }
  void set_current_label(std::string label) { current_label_ = std::move(label); }
  int current_frame() const { return current_frame_; }
  void set_current_frame(int frame) { current_frame_ = frame; }

  /// Content hash over every layer (names, labels, points).
  std::uint64_t content_hash() const;

 private:
  struct Entry {
    AnnotationLayer layer;
    std::uint64_t revision = 0;
  };
  struct UndoRecord {
    std::string name;
    std::optional<AnnotationLayer> before;  // nullopt: layer did not exist
  };

  Entry& entry(const std::string& name);
  void push_undo(const std::string& name, std::optional<AnnotationLayer> before);

  std::map<std::string, Entry> layers_;
  std::deque<UndoRecord> undo_;
  std::uint64_t clock_ = 0;  // revisions are unique store-wide
  std::optional<std::string> primary_;
  std::optional<std::string> overlay_;
  std::string current_label_ = "0";
  int current_frame_ = 0;
};

}  // namespace ustrack
