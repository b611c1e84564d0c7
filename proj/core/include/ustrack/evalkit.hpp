#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ustrack/media.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

/// RMS Euclidean distance in mm over the frames both trajectories share.
/// Throws ContractError when they share none.
double rmse(const Trajectory& a, const Trajectory& b, const Calibration& cal);

/// One-sided Welch power spectral density.
struct Spectrum {
  std::vector<double> freqs;  // Hz, 0 .. fps/2
  std::vector<double> power;  // units^2 / Hz
  int segment = 0;
  int overlap = 0;
  int segments_averaged = 0;
  std::string window = "hann";

  /// Index of the bin whose centre is closest to `hz`.
  std::size_t bin(double hz) const;
  /// Mean density over bins with freqs in [lo, hi].
  double mean_power(double lo, double hi) const;
};

/// Welch segment length used for a series of `length` samples:
/// min(256, largest power of two <= length/2).
int welch_segment(std::size_t length);

/// Hann window, 50% overlap, per-segment mean removal. Requires at least 8
/// samples.
Spectrum psd(const std::vector<double>& series, double fps);

enum class BandKind { lowpass, highpass };

/// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Digital Butterworth design (bilinear transform with pre-warping) as
/// cascaded second-order sections. `order` must be even.
std::vector<Biquad> butterworth(int order, double cutoff_hz, double fps, BandKind kind);

/// Complex frequency response of a cascade at `hz`.
std::complex<double> frequency_response(const std::vector<Biquad>& sections, double hz, double fps);

/// 4th-order Butterworth run forward then backward (zero phase), with odd
/// reflection padding of 3*order samples at both ends and steady-state initial
/// conditions. Throws ContractError unless 0 < cutoff < fps/2.
std::vector<double> band_filter(const std::vector<double>& series, double fps, BandKind kind,
                                double cutoff_hz);

/// sqrt(RMS_x^2 + RMS_y^2) in mm of the high-passed coordinate series.
/// `traj` must be dense over its first..last frame.
double jitter_metric(const Trajectory& traj, double fps, const Calibration& cal,
                     double cutoff_hz = 1.5);

}  // namespace ustrack
