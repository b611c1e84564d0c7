#include "ustrack/evalkit.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "ustrack/error.hpp"

namespace ustrack {

double rmse(const Trajectory& a, const Trajectory& b, const Calibration& cal) {
  cal.validate();
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [f, pa] : a) {
    auto it = b.find(f);
    if (it == b.end()) continue;
    const double dx = (pa.x - it->second.x) * cal.mm_per_px_x;
    const double dy = (pa.y - it->second.y) * cal.mm_per_px_y;
    sum += dx * dx + dy * dy;
    ++count;
  }
  if (count == 0) throw ContractError("rmse: trajectories share no frames");
  return std::sqrt(sum / static_cast<double>(count));
}

// ---------------------------------------------------------------------------
// Welch PSD

std::size_t Spectrum::bin(double hz) const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < freqs.size(); ++k) {
    if (std::abs(freqs[k] - hz) < std::abs(freqs[best] - hz)) best = k;
  }
  return best;
}

double Spectrum::mean_power(double lo, double hi) const {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (freqs[k] >= lo && freqs[k] <= hi) {
      sum += power[k];
      ++n;
    }
  }
  if (n == 0) throw ContractError("mean_power: no bins in the requested band");
  return sum / n;
}

int welch_segment(std::size_t length) {
  std::size_t seg = 1;
  while (seg * 2 <= length / 2) seg *= 2;
  return static_cast<int>(std::min<std::size_t>(seg, 256));
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

Spectrum psd(const std::vector<double>& series, double fps) {
  if (!(fps > 0.0)) throw ContractError("psd: fps must be > 0");
  if (series.size() < 8) throw ContractError("psd: series needs at least 8 samples");
  for (double v : series) {
    if (!std::isfinite(v)) throw ContractError("psd: series contains non-finite values");
  }
  const int seg = welch_segment(series.size());
  const int hop = seg / 2;
  const int nseg = (static_cast<int>(series.size()) - seg) / hop + 1;
  const int bins = seg / 2 + 1;

  std::vector<double> window(static_cast<std::size_t>(seg));
  double wss = 0.0;
  for (int i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / seg);
    wss += window[i] * window[i];
  }
  const double scale = 1.0 / (fps * wss);

  double* in = fftw_alloc_real(static_cast<std::size_t>(seg));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(bins));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(seg, in, out, FFTW_ESTIMATE);
  }

  Spectrum s;
  s.segment = seg;
  s.overlap = hop;
  s.segments_averaged = nseg;
  s.freqs.resize(static_cast<std::size_t>(bins));
  s.power.assign(static_cast<std::size_t>(bins), 0.0);
  for (int k = 0; k < bins; ++k) s.freqs[k] = k * fps / seg;

  for (int m = 0; m < nseg; ++m) {
    const double* x = series.data() + static_cast<std::size_t>(m) * hop;
    double mean = 0.0;
    for (int i = 0; i < seg; ++i) mean += x[i];
    mean /= seg;
    for (int i = 0; i < seg; ++i) in[i] = (x[i] - mean) * window[i];
    fftw_execute(plan);
    for (int k = 0; k < bins; ++k) {
      double p = (out[k][0] * out[k][0] + out[k][1] * out[k][1]) * scale;
      if (k != 0 && !(seg % 2 == 0 && k == seg / 2)) p *= 2.0;
      s.power[k] += p / nseg;
    }
  }

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return s;
}

// ---------------------------------------------------------------------------
// Butterworth

std::vector<Biquad> butterworth(int order, double cutoff_hz, double fps, BandKind kind) {
  if (order < 2 || order % 2 != 0) throw ContractError("butterworth: order must be even and >= 2");
  if (!(fps > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < fps / 2.0)) {
    throw ContractError("band filter cutoff must satisfy 0 < cutoff < fps/2 (cutoff " +
                        std::to_string(cutoff_hz) + " Hz, fps " + std::to_string(fps) + ")");
  }
  using cd = std::complex<double>;
  const double two_fs = 2.0 * fps;
  const double warped = two_fs * std::tan(std::numbers::pi * cutoff_hz / fps);

  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const cd proto = std::polar(1.0, std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order));
    const cd s = kind == BandKind::lowpass ? warped * proto : warped / proto;
    const cd z = (two_fs + s) / (two_fs - s);
    const double a1 = -2.0 * z.real();
    const double a2 = std::norm(z);
    if (kind == BandKind::lowpass) {
      const double g = (1.0 + a1 + a2) / 4.0;
      sections.push_back({g, 2.0 * g, g, a1, a2});
    } else {
      const double g = (1.0 - a1 + a2) / 4.0;
      sections.push_back({g, -2.0 * g, g, a1, a2});
    }
  }
  return sections;
}

std::complex<double> frequency_response(const std::vector<Biquad>& sections, double hz, double fps) {
  const std::complex<double> zi = std::polar(1.0, -2.0 * std::numbers::pi * hz / fps);
  std::complex<double> h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
  }
  return h;
}

namespace {

// Direct form II transposed, starting in the steady state for a constant
// input equal to x[0].
void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x) {
  if (x.empty()) return;
  double level = x.front();
  for (const auto& s : sections) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = (s.b2 - s.a2 * dc) * level;
    double z1 = (s.b1 + s.b2 - (s.a1 + s.a2) * dc) * level;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level *= dc;
  }
}

}  // namespace

std::vector<double> band_filter(const std::vector<double>& series, double fps, BandKind kind,
                                double cutoff_hz) {
  constexpr int kOrder = 4;
  const auto sections = butterworth(kOrder, cutoff_hz, fps, kind);
  const std::size_t n = series.size();
  if (n < 2) throw ContractError("band_filter: series needs at least 2 samples");
  const std::size_t pad = std::min<std::size_t>(3 * kOrder, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * series.front() - series[i]);
  ext.insert(ext.end(), series.begin(), series.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * series.back() - series[n - 1 - i]);

  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double jitter_metric(const Trajectory& traj, double fps, const Calibration& cal, double cutoff_hz) {
  cal.validate();
  if (traj.empty()) throw ContractError("jitter_metric: empty trajectory");
  const int first = traj.begin()->first, last = traj.rbegin()->first;
  if (static_cast<int>(traj.size()) != last - first + 1) {
    throw ContractError("jitter_metric: trajectory must be dense over frames " +
                        std::to_string(first) + ".." + std::to_string(last));
  }
  std::vector<double> xs, ys;
  xs.reserve(traj.size());
  ys.reserve(traj.size());
  for (const auto& [f, p] : traj) {
    xs.push_back(p.x * cal.mm_per_px_x);
    ys.push_back(p.y * cal.mm_per_px_y);
  }
  auto rms = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  const double rx = rms(band_filter(xs, fps, BandKind::highpass, cutoff_hz));
  const double ry = rms(band_filter(ys, fps, BandKind::highpass, cutoff_hz));
  return std::sqrt(rx * rx + ry * ry);
}

}  // namespace ustrack
