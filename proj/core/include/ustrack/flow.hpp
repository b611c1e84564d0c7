#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "ustrack/media.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

/// Sparse Lucas-Kanade parameters.
struct TrackConfig {
  int win = 21;            // odd window side, px
  int levels = 3;          // pyramid levels
  int max_iters = 30;      // Gauss-Newton iterations per level
  double eps = 0.01;       // convergence threshold on the update, px
  double min_eig = 1e-4;   // min eigenvalue of G / win^2

  void validate() const;
};

enum class TrackStatus { ok, lost };

struct TrackedPoint {
  Point2 p;
  TrackStatus status = TrackStatus::ok;
  double residual = 0.0;  // mean |I_prev - I_next| over the window

  bool ok() const { return status == TrackStatus::ok; }
};

/// Single-level iterative LK registration of the window around `p0` in
/// `prev`, starting from displacement `guess - p0`. On failure the returned
/// point is `guess` (the last valid estimate) with status lost.
TrackedPoint lk_step(const Frame& prev, const Frame& next, Point2 p0, Point2 guess,
                     const TrackConfig& cfg);

/// Coarse-to-fine LK. On a lost level the result is `p0`, flagged lost.
TrackedPoint pyr_track(const Pyramid& prev, const Pyramid& next, Point2 p0, const TrackConfig& cfg);

/// Thread-safe, bounded LRU of per-frame pyramids over one sequence.
class PyramidCache {
 public:
  PyramidCache(const FrameSequence& seq, int levels, std::size_t capacity = 64);

  std::shared_ptr<const Pyramid> get(int frame);
  /// Drops every cached pyramid whose frame index is below `frame`.
  void evict_before(int frame);

  const FrameSequence& sequence() const { return seq_; }
  int levels() const { return levels_; }

 private:
  const FrameSequence& seq_;
  int levels_;
  std::size_t capacity_;
  std::mutex mu_;
  std::list<int> lru_;  // front = most recent
  std::unordered_map<int, std::pair<std::shared_ptr<const Pyramid>, std::list<int>::iterator>> map_;
};

/// Chained per-frame tracking from `from` toward `to`. points[k] is the
/// estimate at frame from + k*direction; points[0] is the start point.
struct TrackSegment {
  int from = 0;
  int to = 0;
  std::vector<TrackedPoint> points;

  int direction() const { return to >= from ? 1 : -1; }
  int frame_at(std::size_t k) const { return from + direction() * static_cast<int>(k); }
  /// Estimate at absolute frame index `frame`.
  const TrackedPoint& at_frame(int frame) const;
};

/// Once a step is lost every later frame carries the last valid estimate,
/// flagged lost. `from == to` yields the single start point.
TrackSegment track_range(PyramidCache& pyramids, Point2 start, int from, int to,
                         const TrackConfig& cfg);
TrackSegment track_range(const FrameSequence& seq, Point2 start, int from, int to,
                         const TrackConfig& cfg);

}  // namespace ustrack
