#include "ustrack/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ustrack/error.hpp"

namespace ustrack {

void TrackConfig::validate() const {
  if (win < 3 || win % 2 == 0) throw ContractError("LK window must be odd and >= 3");
  if (levels < 1) throw ContractError("LK levels must be >= 1");
  if (max_iters < 1) throw ContractError("LK max_iters must be >= 1");
  if (!(eps > 0.0)) throw ContractError("LK eps must be > 0");
  if (!(min_eig >= 0.0)) throw ContractError("LK min_eig must be >= 0");
}

namespace {

// Integer grid position plus the fractional offset shared by a whole lattice.
struct Anchor {
  int ix, iy;
  double fx, fy;

  explicit Anchor(Point2 p) {
    const double x = std::floor(p.x), y = std::floor(p.y);
    ix = static_cast<int>(x);
    iy = static_cast<int>(y);
    fx = p.x - x;
    fy = p.y - y;
  }
};

// Bilinear samples (clamp-to-edge) at (a.ix + x0 + i + a.fx, a.iy + y0 + j + a.fy)
// for i, j in [0, side). Same arithmetic as sample_bilinear.
void sample_lattice(const Frame& f, const Anchor& a, int x0, int y0, int side, double* out,
                    std::vector<int>& cols) {
  const int w = f.width(), h = f.height();
  const std::span<const float> data = f.data();
  cols.resize(static_cast<std::size_t>(side) + 1);
  for (int i = 0; i <= side; ++i) cols[i] = std::clamp(a.ix + x0 + i, 0, w - 1);
  for (int j = 0; j < side; ++j) {
    const int ya = std::clamp(a.iy + y0 + j, 0, h - 1);
    const int yb = std::clamp(a.iy + y0 + j + 1, 0, h - 1);
    const float* ra = data.data() + static_cast<std::size_t>(ya) * w;
    const float* rb = data.data() + static_cast<std::size_t>(yb) * w;
    double* row = out + static_cast<std::size_t>(j) * side;
    for (int i = 0; i < side; ++i) {
      const double pa = ra[cols[i]], pb = ra[cols[i + 1]];
      const double pc = rb[cols[i]], pd = rb[cols[i + 1]];
      const double top = pa + a.fx * (pb - pa);
      const double bottom = pc + a.fx * (pd - pc);
      row[i] = top + a.fy * (bottom - top);
    }
  }
}

bool inside(const Frame& f, Point2 p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= f.width() - 1 && p.y <= f.height() - 1;
}

Point2 clamp_to(const Frame& f, Point2 p) {
  if (!is_finite(p)) return {0.0, 0.0};
  return {std::clamp(p.x, 0.0, static_cast<double>(f.width() - 1)),
          std::clamp(p.y, 0.0, static_cast<double>(f.height() - 1))};
}

struct Scratch {
  std::vector<double> lattice, tmpl, gx, gy, next;
  std::vector<int> cols;
};

}  // namespace

TrackedPoint lk_step(const Frame& prev, const Frame& next, Point2 p0, Point2 guess,
                     const TrackConfig& cfg) {
  cfg.validate();
  if (prev.width() != next.width() || prev.height() != next.height()) {
    throw ContractError("lk_step: frames " + std::to_string(prev.index()) + " and " +
                        std::to_string(next.index()) + " differ in size");
  }
  if (prev.empty()) throw ContractError("lk_step: empty frame");

  thread_local Scratch s;
  const int r = cfg.win / 2;
  const int n = cfg.win * cfg.win;
  const int side = cfg.win + 2;

  p0 = clamp_to(prev, p0);
  guess = clamp_to(prev, guess);

  // Template and its gradient, from a lattice one pixel wider on each side.
  s.lattice.resize(static_cast<std::size_t>(side) * side);
  s.tmpl.resize(n);
  s.gx.resize(n);
  s.gy.resize(n);
  const Anchor a0(p0);
  sample_lattice(prev, a0, -r - 1, -r - 1, side, s.lattice.data(), s.cols);
  double gxx = 0.0, gxy = 0.0, gyy = 0.0;
  for (int j = 0; j < cfg.win; ++j) {
    const double* up = s.lattice.data() + static_cast<std::size_t>(j) * side;
    const double* mid = up + side;
    const double* down = mid + side;
    for (int i = 0; i < cfg.win; ++i) {
      const int k = j * cfg.win + i;
      const double gx = (mid[i + 2] - mid[i]) / 2.0;
      const double gy = (down[i + 1] - up[i + 1]) / 2.0;
      s.tmpl[k] = mid[i + 1];
      s.gx[k] = gx;
      s.gy[k] = gy;
      gxx += gx * gx;
      gxy += gx * gy;
      gyy += gy * gy;
    }
  }

  const double half_trace = (gxx + gyy) / 2.0;
  const double min_eig = half_trace - std::sqrt((gxx - gyy) * (gxx - gyy) / 4.0 + gxy * gxy);
  const double det = gxx * gyy - gxy * gxy;
  if (min_eig / n < cfg.min_eig || !(det > 0.0)) {
    return {guess, TrackStatus::lost, 0.0};
  }

  Point2 d = guess - p0;
  double residual = 0.0;
  s.next.resize(n);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Point2 q = p0 + d;
    if (!inside(next, q)) return {guess, TrackStatus::lost, residual};
    sample_lattice(next, Anchor(q), -r, -r, cfg.win, s.next.data(), s.cols);
    double bx = 0.0, by = 0.0, err = 0.0;
    for (int k = 0; k < n; ++k) {
      const double e = s.tmpl[k] - s.next[k];
      bx += s.gx[k] * e;
      by += s.gy[k] * e;
      err += std::abs(e);
    }
    residual = err / n;
    const Point2 delta{(gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det};
    d = d + delta;
    if (norm(delta) < cfg.eps) break;
  }
  const Point2 p = p0 + d;
  if (!is_finite(p) || !inside(next, p)) return {guess, TrackStatus::lost, residual};
  return {p, TrackStatus::ok, residual};
}

TrackedPoint pyr_track(const Pyramid& prev, const Pyramid& next, Point2 p0, const TrackConfig& cfg) {
  if (prev.level_count() != next.level_count() || prev.level_count() < 1) {
    throw ContractError("pyr_track: pyramids must have equal, non-zero level counts");
  }
  const int top = std::min(cfg.levels, prev.level_count()) - 1;
  Point2 d{0.0, 0.0};
  double residual = 0.0;
  for (int level = top; level >= 0; --level) {
    const std::size_t l = static_cast<std::size_t>(level);
    const Point2 pl{std::ldexp(p0.x, -level), std::ldexp(p0.y, -level)};
    const TrackedPoint step = lk_step(prev.levels[l], next.levels[l], pl, pl + d, cfg);
    if (!step.ok()) return {p0, TrackStatus::lost, step.residual};
    d = step.p - pl;
    residual = step.residual;
    if (level > 0) d = 2.0 * d;
  }
  return {p0 + d, TrackStatus::ok, residual};
}

// ---------------------------------------------------------------------------

PyramidCache::PyramidCache(const FrameSequence& seq, int levels, std::size_t capacity)
    : seq_(seq), levels_(levels), capacity_(std::max<std::size_t>(capacity, 2)) {
  if (levels < 1) throw ContractError("pyramid cache needs at least one level");
}

std::shared_ptr<const Pyramid> PyramidCache::get(int frame) {
  {
    std::lock_guard lock(mu_);
    if (auto it = map_.find(frame); it != map_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
  }
  auto built = std::make_shared<const Pyramid>(build_pyramid(seq_.frame(frame), levels_));
  std::lock_guard lock(mu_);
  if (auto it = map_.find(frame); it != map_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
  }
  lru_.push_front(frame);
  map_.emplace(frame, std::make_pair(built, lru_.begin()));
  while (map_.size() > capacity_) {
    map_.erase(lru_.back());
    lru_.pop_back();
  }
  return built;
}

void PyramidCache::evict_before(int frame) {
  std::lock_guard lock(mu_);
  for (auto it = lru_.begin(); it != lru_.end();) {
    if (*it < frame) {
      map_.erase(*it);
      it = lru_.erase(it);
    } else {
      ++it;
    }
  }
}

const TrackedPoint& TrackSegment::at_frame(int frame) const {
  const int k = (frame - from) * direction();
  if (k < 0 || k >= static_cast<int>(points.size())) {
    throw NotFoundError("frame " + std::to_string(frame) + " outside track segment [" +
                        std::to_string(std::min(from, to)) + ", " +
                        std::to_string(std::max(from, to)) + "]");
  }
  return points[static_cast<std::size_t>(k)];
}

TrackSegment track_range(PyramidCache& pyramids, Point2 start, int from, int to,
                         const TrackConfig& cfg) {
  cfg.validate();
  const int n = pyramids.sequence().count();
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw ContractError("track_range: frames " + std::to_string(from) + " -> " +
                        std::to_string(to) + " outside [0, " + std::to_string(n - 1) + "]");
  }
  TrackSegment seg{from, to, {}};
  const int dir = seg.direction();
  seg.points.reserve(static_cast<std::size_t>(std::abs(to - from)) + 1);
  seg.points.push_back({start, TrackStatus::ok, 0.0});

  Point2 current = start;
  bool lost = false;
  for (int f = from; f != to; f += dir) {
    if (lost) {
      seg.points.push_back({current, TrackStatus::lost, 0.0});
      continue;
    }
    const auto a = pyramids.get(f);
    const auto b = pyramids.get(f + dir);
    const TrackedPoint step = pyr_track(*a, *b, current, cfg);
    if (!step.ok()) {
      lost = true;
      seg.points.push_back({current, TrackStatus::lost, step.residual});
      continue;
    }
    current = step.p;
    seg.points.push_back(step);
  }
  return seg;
}

TrackSegment track_range(const FrameSequence& seq, Point2 start, int from, int to,
                         const TrackConfig& cfg) {
  PyramidCache cache(seq, cfg.levels, 2);
  return track_range(cache, start, from, to, cfg);
}

}  // namespace ustrack
