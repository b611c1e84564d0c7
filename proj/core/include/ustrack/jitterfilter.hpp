#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <vector>

#include "ustrack/annotstore.hpp"
#include "ustrack/media.hpp"
#include "ustrack/rstc.hpp"

namespace ustrack {

/// Transposed sliding-window filter settings.
struct FilterConfig {
  int window_frames = 30;  // W
  RstcConfig rstc;

  /// W = round(seconds * fps), e.g. 0.6 s at 50 Hz -> 30.
  static int window_from_seconds(double seconds, double fps);

  void validate() const;
};

struct FilteredTrajectory {
  std::vector<Point2> points;  // one per frame
  std::vector<int> coverage;   // interior estimates averaged at each frame
  std::string source;          // label or layer the input came from
};

/// Number of window starts s in [0, N-W] whose interior s+1..s+W-2 contains t.
int coverage_count(int t, int window, int frames);

/// Progress callback: (windows done, windows total). Called from the calling
/// thread only.
using FilterProgress = std::function<void(int, int)>;

/// Builds one LK-RSTC tracklet per window start s in [0, N-W], anchored on
/// input[s] and input[s+W-1], and averages the interior estimates that cover
/// each frame (compensated summation, independent of evaluation order).
/// Frames with no valid covering estimate pass the input through.
FilteredTrajectory filter_trajectory(const FrameSequence& seq, const Trajectory& input,
                                     const FilterConfig& cfg, const FilterProgress& progress = {});

/// Filters every label independently. The output layer is named
/// `<input>_lkrstc`.
AnnotationLayer filter_layer(const FrameSequence& seq, const AnnotationLayer& layer,
                             const FilterConfig& cfg, const FilterProgress& progress = {});

}  // namespace ustrack
