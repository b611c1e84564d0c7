#pragma once

#include <vector>

#include "ustrack/flow.hpp"
#include "ustrack/media.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

struct RstcConfig {
  double alpha = 10.0;  // sigmoid steepness
  TrackConfig track;

  void validate() const;
};

/// Bidirectional fused track between anchor frames a < b.
struct Tracklet {
  int a = 0;
  int b = 0;
  Point2 pa;
  Point2 pb;
  std::vector<Point2> estimates;  // frames a..b
  std::vector<char> interior_valid;  // both directional tracks ok at the frame

  int length() const { return b - a + 1; }
  const Point2& at(int frame) const { return estimates[static_cast<std::size_t>(frame - a)]; }
  bool valid_at(int frame) const { return interior_valid[static_cast<std::size_t>(frame - a)] != 0; }
};

/// Forward-track weights over a span of `length` frames: a logistic in
/// normalized time rescaled so w[0] = 1 and w[L-1] = 0, strictly decreasing,
/// with w[k] + w[L-1-k] == 1 exactly.
std::vector<double> sigmoid_weights(int length, double alpha);

/// Tracks forward from (a, pa) and backward from (b, pb) and blends the two
/// with sigmoid_weights.
Tracklet rstc_tracklet(PyramidCache& pyramids, int a, int b, Point2 pa, Point2 pb,
                       const RstcConfig& cfg);
Tracklet rstc_tracklet(const FrameSequence& seq, int a, int b, Point2 pa, Point2 pb,
                       const RstcConfig& cfg);

}  // namespace ustrack
