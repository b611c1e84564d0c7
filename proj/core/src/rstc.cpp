#include "ustrack/rstc.hpp"

#include <cmath>
#include <string>

#include "ustrack/error.hpp"

namespace ustrack {

void RstcConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractError("sigmoid alpha must be > 0");
  track.validate();
}

std::vector<double> sigmoid_weights(int length, double alpha) {
  if (length < 2) throw ContractError("sigmoid_weights: span must cover at least 2 frames");
  if (!(alpha > 0.0)) throw ContractError("sigmoid_weights: alpha must be > 0");

  auto logistic = [alpha](double s) { return 1.0 / (1.0 + std::exp(alpha * (s - 0.5))); };
  const double hi = logistic(0.0);
  const double lo = logistic(1.0);
  const double last = static_cast<double>(length - 1);

  // Fill the first half and mirror it so the symmetry holds bit-exactly:
  // 1 - w is exact for w in [0.5, 1].
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int k = 0; 2 * k < length - 1; ++k) {
    w[k] = (logistic(k / last) - lo) / (hi - lo);
    w[length - 1 - k] = 1.0 - w[k];
  }
  if (length % 2 == 1) w[length / 2] = 0.5;
  w.front() = 1.0;
  w.back() = 0.0;
  return w;
}

Tracklet rstc_tracklet(PyramidCache& pyramids, int a, int b, Point2 pa, Point2 pb,
                       const RstcConfig& cfg) {
  cfg.validate();
  const int n = pyramids.sequence().count();
  if (!(0 <= a && a < b && b < n)) {
    throw ContractError("rstc_tracklet: anchors must satisfy 0 <= a < b < N (a=" +
                        std::to_string(a) + ", b=" + std::to_string(b) +
                        ", N=" + std::to_string(n) + ")");
  }
  const TrackSegment fwd = track_range(pyramids, pa, a, b, cfg.track);
  const TrackSegment rev = track_range(pyramids, pb, b, a, cfg.track);
  const auto w = sigmoid_weights(b - a + 1, cfg.alpha);

  Tracklet t{a, b, pa, pb, {}, {}};
  const std::size_t len = w.size();
  t.estimates.resize(len);
  t.interior_valid.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const TrackedPoint& f = fwd.points[k];
    const TrackedPoint& r = rev.points[len - 1 - k];
    t.estimates[k] = w[k] * f.p + (1.0 - w[k]) * r.p;
    t.interior_valid[k] = f.ok() && r.ok();
  }
  t.estimates.front() = pa;
  t.estimates.back() = pb;
  return t;
}

Tracklet rstc_tracklet(const FrameSequence& seq, int a, int b, Point2 pa, Point2 pb,
                       const RstcConfig& cfg) {
  PyramidCache cache(seq, cfg.track.levels, static_cast<std::size_t>(b - a + 1));
  return rstc_tracklet(cache, a, b, pa, pb, cfg);
}

}  // namespace ustrack
