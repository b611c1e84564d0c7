#include "ustrack/jitterfilter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ustrack/error.hpp"
#include "ustrack/parallel.hpp"

namespace ustrack {

int FilterConfig::window_from_seconds(double seconds, double fps) {
  if (!(seconds > 0.0) || !(fps > 0.0)) throw ContractError("window seconds and fps must be > 0");
  return static_cast<int>(std::lround(seconds * fps));
}

void FilterConfig::validate() const {
  if (window_frames < 3) throw ContractError("filter window must span at least 3 frames");
  rstc.validate();
}

int coverage_count(int t, int window, int frames) {
  if (window < 3 || window > frames) throw ContractError("coverage_count: need 3 <= W <= N");
  if (t < 0 || t >= frames) throw ContractError("coverage_count: frame outside [0, N-1]");
  const int lo = std::max(0, t - window + 2);
  const int hi = std::min(t - 1, frames - window);
  return std::max(0, hi - lo + 1);
}

namespace {

// Neumaier summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

void require_dense(const Trajectory& input, int frames, const std::string& source) {
  std::vector<int> missing;
  for (int t = 0; t < frames; ++t) {
    if (!input.count(t)) missing.push_back(t);
  }
  const std::string who = source.empty() ? "input trajectory" : "label '" + source + "'";
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      list += (i ? ", " : "") + std::to_string(missing[i]);
    }
    if (missing.size() > 10) list += ", ... (" + std::to_string(missing.size()) + " total)";
    throw ContractError(who + " is not dense; missing frames " + list);
  }
  if (!input.empty() && (input.begin()->first < 0 || input.rbegin()->first >= frames)) {
    throw ContractError(who + " has frames outside [0, " + std::to_string(frames - 1) + "]");
  }
}

FilteredTrajectory filter_impl(const FrameSequence& seq, const Trajectory& input,
                               const FilterConfig& cfg, const std::string& source,
                               const std::function<void(int)>& on_window_block) {
  cfg.validate();
  const int n = seq.count();
  const int w = cfg.window_frames;
  if (n < w) {
    throw ContractError("window exceeds sequence length (window " + std::to_string(w) +
                        " frames, sequence " + std::to_string(n) + " frames)");
  }
  require_dense(input, n, source);

  std::vector<Point2> in(static_cast<std::size_t>(n));
  for (const auto& [t, p] : input) in[static_cast<std::size_t>(t)] = p;

  std::vector<CompensatedSum> sx(static_cast<std::size_t>(n)), sy(static_cast<std::size_t>(n));
  std::vector<int> used(static_cast<std::size_t>(n), 0);

  const int windows = n - w + 1;
  const int block = std::max(16, 4 * worker_count());
  PyramidCache cache(seq, cfg.rstc.track.levels, static_cast<std::size_t>(block + w + 2));
  std::vector<Tracklet> tracklets;

  for (int s0 = 0; s0 < windows; s0 += block) {
    const int s1 = std::min(windows, s0 + block);
    const int f0 = s0, f1 = s1 - 1 + w - 1;
    parallel_for(static_cast<std::size_t>(f1 - f0 + 1),
                 [&](std::size_t i) { cache.get(f0 + static_cast<int>(i)); });

    tracklets.assign(static_cast<std::size_t>(s1 - s0), Tracklet{});
    parallel_for(tracklets.size(), [&](std::size_t i) {
      const int s = s0 + static_cast<int>(i);
      const int e = s + w - 1;
      tracklets[i] = rstc_tracklet(cache, s, e, in[static_cast<std::size_t>(s)],
                                   in[static_cast<std::size_t>(e)], cfg.rstc);
    });

    for (const Tracklet& t : tracklets) {
      for (int f = t.a + 1; f < t.b; ++f) {
        if (!t.valid_at(f)) continue;
        const Point2 p = t.at(f);
        sx[static_cast<std::size_t>(f)].add(p.x);
        sy[static_cast<std::size_t>(f)].add(p.y);
        ++used[static_cast<std::size_t>(f)];
      }
    }
    cache.evict_before(s1);
    if (on_window_block) on_window_block(s1 - s0);
  }

  FilteredTrajectory out;
  out.source = source;
  out.points.resize(static_cast<std::size_t>(n));
  out.coverage = used;
  for (std::size_t t = 0; t < static_cast<std::size_t>(n); ++t) {
    out.points[t] = used[t] == 0 ? in[t]
                                 : Point2{sx[t].value() / used[t], sy[t].value() / used[t]};
  }
  return out;
}

}  // namespace

FilteredTrajectory filter_trajectory(const FrameSequence& seq, const Trajectory& input,
                                     const FilterConfig& cfg, const FilterProgress& progress) {
  const int total = std::max(0, seq.count() - cfg.window_frames + 1);
  int done = 0;
  return filter_impl(seq, input, cfg, "", [&](int k) {
    done += k;
    if (progress) progress(done, total);
  });
}

AnnotationLayer filter_layer(const FrameSequence& seq, const AnnotationLayer& layer,
                             const FilterConfig& cfg, const FilterProgress& progress) {
  AnnotationLayer out;
  out.name = layer.name + "_lkrstc";
  const int per_label = std::max(0, seq.count() - cfg.window_frames + 1);
  const int total = per_label * static_cast<int>(layer.labels.size());
  int done = 0;
  for (const auto& [id, traj] : layer.labels) {
    FilteredTrajectory f;
    try {
      f = filter_impl(seq, traj, cfg, id, [&](int k) {
        done += k;
        if (progress) progress(done, total);
      });
    } catch (const ContractError& e) {
      const std::string msg = e.what();
      if (msg.rfind("label '", 0) == 0) throw;
      throw ContractError("label '" + id + "': " + msg);
    }
    Trajectory& dst = out.labels[id];
    for (std::size_t t = 0; t < f.points.size(); ++t) dst[static_cast<int>(t)] = f.points[t];
  }
  return out;
}

}  // namespace ustrack
