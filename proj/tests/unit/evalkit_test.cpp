#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ustrack/error.hpp"
#include "ustrack/evalkit.hpp"

namespace ustrack {
namespace {

constexpr double kPi = std::numbers::pi;
const Calibration kUnit{1.0, 1.0, 50.0};

std::vector<double> sine(std::size_t n, double fps, double hz, double amp, double phase = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * kPi * hz * i / fps + phase);
  return v;
}

std::vector<double> white(std::size_t n, double sigma, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Trajectory xy_trajectory(const std::vector<double>& xs, const std::vector<double>& ys) {
  Trajectory t;
  for (std::size_t i = 0; i < xs.size(); ++i) t[static_cast<int>(i)] = {xs[i], ys[i]};
  return t;
}

// -- rmse --------------------------------------------------------------------

TEST(Rmse, WorkedExamples) {
  const Trajectory a = oracle::constant_trajectory({1, 1}, 10);
  EXPECT_EQ(rmse(a, a, kUnit), 0.0);
  EXPECT_DOUBLE_EQ(rmse(a, oracle::constant_trajectory({4, 5}, 10), kUnit), 5.0);
  Trajectory alt;
  for (int f = 0; f < 10; ++f) alt[f] = {1, f % 2 ? 3.0 : 1.0};
  EXPECT_DOUBLE_EQ(rmse(a, alt, kUnit), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(rmse(a, oracle::constant_trajectory({4, 5}, 10), Calibration{2, 1, 50}),
                   std::sqrt(36.0 + 16.0));
}

TEST(Rmse, UsesSharedFramesOnly) {
  const Trajectory a{{0, {0, 0}}, {1, {0, 0}}, {5, {9, 9}}};
  const Trajectory b{{0, {3, 4}}, {1, {3, 4}}, {7, {0, 0}}};
  EXPECT_DOUBLE_EQ(rmse(a, b, kUnit), 5.0);
  EXPECT_THROW(rmse(Trajectory{{0, {0, 0}}}, Trajectory{{1, {0, 0}}}, kUnit), ContractError);
}

TEST(Rmse, IsAMetric) {
  std::mt19937 rng(1);
  std::normal_distribution<double> d(0, 3);
  auto random_traj = [&] {
    Trajectory t;
    for (int f = 0; f < 40; ++f) t[f] = {d(rng), d(rng)};
    return t;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory x = random_traj(), y = random_traj(), z = random_traj();
    EXPECT_EQ(rmse(x, y, kUnit), rmse(y, x, kUnit));
    EXPECT_EQ(rmse(x, x, kUnit), 0.0);
    EXPECT_GT(rmse(x, y, kUnit), 0.0);
    EXPECT_LE(rmse(x, z, kUnit), rmse(x, y, kUnit) + rmse(y, z, kUnit) + 1e-12);
  }
}

// -- psd ---------------------------------------------------------------------

TEST(Psd, SegmentRule) {
  EXPECT_EQ(welch_segment(500), 128);
  EXPECT_EQ(welch_segment(512), 256);
  EXPECT_EQ(welch_segment(10000), 256);
  EXPECT_EQ(welch_segment(8), 4);
}

TEST(Psd, MetadataAndAxis) {
  const Spectrum s = psd(white(500, 1, 1), 50.0);
  EXPECT_EQ(s.segment, 128);
  EXPECT_EQ(s.overlap, 64);
  EXPECT_EQ(s.segments_averaged, 6);
  EXPECT_EQ(s.window, "hann");
  ASSERT_EQ(s.freqs.size(), 65u);
  EXPECT_EQ(s.freqs.front(), 0.0);
  EXPECT_EQ(s.freqs.back(), 25.0);
  for (std::size_t k = 1; k < s.freqs.size(); ++k) EXPECT_GT(s.freqs[k], s.freqs[k - 1]);
  for (double p : s.power) EXPECT_GE(p, 0.0);
}

TEST(Psd, ConstantSeriesHasNoPower) {
  const Spectrum s = psd(std::vector<double>(300, 4.25), 50.0);
  for (std::size_t k = 1; k < s.power.size(); ++k) EXPECT_LT(s.power[k], 1e-25);
}

TEST(Psd, FiveHertzTone) {
  // 500 samples give 128-sample segments, where 5 Hz sits 0.2 bin off a bin
  // centre. At 256 the offset is 0.4 bin and Hann leakage two bins out is
  // about 1.8% of the peak.
  const Spectrum s = psd(sine(500, 50.0, 5.0, 1.0), 50.0);
  ASSERT_EQ(s.segment, 128);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < s.power.size(); ++k)
    if (s.power[k] > s.power[peak]) peak = k;
  const double df = s.freqs[1];
  EXPECT_LE(std::abs(s.freqs[peak] - 5.0), df / 2);
  double outside = 0.0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (k + 1 < peak || k > peak + 1) outside = std::max(outside, s.power[k]);
  }
  EXPECT_LE(outside, 0.01 * s.power[peak]);
}

TEST(Psd, ParsevalForWhiteNoise) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Spectrum s = psd(white(4096, 1.0, seed), 50.0);
    double integral = 0.0;
    for (double p : s.power) integral += p * s.freqs[1];
    EXPECT_NEAR(integral, 1.0, 0.1) << seed;
  }
}

TEST(Psd, MatchesDirectDft) {
  for (std::size_t n : {16u, 100u, 777u}) {
    const auto x = white(n, 2.0, static_cast<unsigned>(n));
    const Spectrum s = psd(x, 30.0);
    const auto ref = oracle::direct_welch(x, 30.0, s.segment);
    ASSERT_EQ(ref.size(), s.power.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_NEAR(s.power[k], ref[k], 1e-9 * (1.0 + ref[k]));
    }
  }
}

TEST(Psd, IndependentNoisesAddInPower) {
  const auto a = white(8192, 1.0, 11), b = white(8192, 2.0, 12);
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
  const double pa = psd(a, 50).mean_power(0, 25), pb = psd(b, 50).mean_power(0, 25);
  EXPECT_NEAR(psd(sum, 50).mean_power(0, 25), pa + pb, 0.15 * (pa + pb));
}

TEST(Psd, RejectsBadInput) {
  EXPECT_THROW(psd(std::vector<double>(7, 0.0), 50), ContractError);
  EXPECT_THROW(psd(std::vector<double>(20, 0.0), 0), ContractError);
  EXPECT_THROW(psd({1, 2, 3, 4, 5, 6, 7, NAN}, 50), ContractError);
  EXPECT_THROW(psd(std::vector<double>(20, 0.0), 50).mean_power(30, 40), ContractError);
}

// -- band filters --------------------------------------------------------------

TEST(Butterworth, ResponseMatchesAnalyticMagnitude) {
  for (auto kind : {BandKind::lowpass, BandKind::highpass}) {
    for (double fc : {1.5, 5.0, 10.0}) {
      const auto sections = butterworth(4, fc, 50.0, kind);
      for (double f : {0.1, 0.5, 1.0, 1.5, 3.0, 7.0, 12.0, 20.0, 24.9}) {
        const double g2 = std::norm(frequency_response(sections, f, 50.0));
        EXPECT_NEAR(g2, oracle::butterworth_gain2(4, fc, 50.0, f, kind == BandKind::lowpass), 1e-9)
            << fc << " " << f;
      }
    }
  }
}

TEST(BandFilter, DcThroughHighPass) {
  const auto out = band_filter(std::vector<double>(200, 3.5), 50.0, BandKind::highpass, 1.5);
  for (double v : out) EXPECT_LT(std::abs(v), 1e-6);
}

TEST(BandFilter, PassbandAndStopbandAmplitudes) {
  const auto one = band_filter(sine(1000, 50, 1.0, 2.0), 50, BandKind::lowpass, 10.0);
  EXPECT_NEAR(oracle::fitted_amplitude(one, 50, 1.0, 100, 900), 2.0, 0.02 * 2.0);

  const auto twenty = band_filter(sine(1000, 50, 20.0, 2.0), 50, BandKind::lowpass, 5.0);
  EXPECT_LT(oracle::fitted_amplitude(twenty, 50, 20.0, 100, 900), 0.02 * 2.0);
}

TEST(BandFilter, SteadyStateGainIsSquaredMagnitude) {
  for (double f : {0.8, 1.5, 3.0, 6.0}) {
    const auto out = band_filter(sine(2000, 50, f, 1.0), 50, BandKind::highpass, 1.5);
    EXPECT_NEAR(oracle::fitted_amplitude(out, 50, f, 300, 1700),
                oracle::butterworth_gain2(4, 1.5, 50, f, false), 2e-3)
        << f;
  }
}

TEST(BandFilter, IsLinear) {
  const auto u = white(300, 1.0, 21), v = sine(300, 50, 2.0, 3.0);
  std::vector<double> mix(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) mix[i] = 2.5 * u[i] - 0.75 * v[i];
  for (auto kind : {BandKind::lowpass, BandKind::highpass}) {
    const auto fu = band_filter(u, 50, kind, 4.0), fv = band_filter(v, 50, kind, 4.0);
    const auto fm = band_filter(mix, 50, kind, 4.0);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(fm[i], 2.5 * fu[i] - 0.75 * fv[i], 1e-9);
  }
}

TEST(BandFilter, IsZeroPhase) {
  std::vector<double> x(600, 0.0);
  for (double f : {0.4, 1.1, 2.3}) {
    const auto s = sine(600, 50, f, 1.0 / f, f);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s[i];
  }
  const auto y = band_filter(x, 50, BandKind::lowpass, 5.0);
  int best_lag = 99;
  double best = -1e300;
  for (int lag = -10; lag <= 10; ++lag) {
    double c = 0.0;
    for (int i = 50; i < 550; ++i) c += x[i] * y[i + lag];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  EXPECT_EQ(best_lag, 0);
}

TEST(BandFilter, InvalidCutoff) {
  const std::vector<double> x(50, 0.0);
  EXPECT_THROW(band_filter(x, 50, BandKind::lowpass, 0.0), ContractError);
  EXPECT_THROW(band_filter(x, 50, BandKind::lowpass, 25.0), ContractError);
  EXPECT_THROW(band_filter(x, 50, BandKind::highpass, -1.0), ContractError);
  EXPECT_THROW(band_filter({1.0}, 50, BandKind::highpass, 1.0), ContractError);
}

TEST(BandFilter, ShortSeriesStillFilters) {
  const auto out = band_filter({1, 2, 3, 4, 5}, 50, BandKind::lowpass, 5.0);
  EXPECT_EQ(out.size(), 5u);
  for (double v : out) EXPECT_TRUE(std::isfinite(v));
}

// -- jitter metric -------------------------------------------------------------

TEST(JitterMetric, ConstantTrajectory) {
  EXPECT_LT(jitter_metric(oracle::constant_trajectory({3, 7}, 200), 50, kUnit), 1e-9);
}

TEST(JitterMetric, WhiteJitterMatchesHighPassEnergy) {
  // Fraction of white-noise power a zero-phase pass keeps: mean of |H|^4.
  double kept = 0.0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    const double f = (i + 0.5) * 25.0 / steps;
    kept += std::pow(oracle::butterworth_gain2(4, 1.5, 50, f, false), 2) / steps;
  }
  const double sigma = 0.8;
  const double expected = std::sqrt(2.0) * sigma * std::sqrt(kept);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto t = xy_trajectory(white(1000, sigma, seed), white(1000, sigma, seed + 100));
    EXPECT_NEAR(jitter_metric(t, 50, kUnit), expected, 0.15 * expected) << seed;
  }
}

TEST(JitterMetric, SlowMotionIsIgnored) {
  const auto xs = sine(1000, 50, 0.5, 5.0);
  const auto t = xy_trajectory(xs, std::vector<double>(xs.size(), 10.0));
  const double signal_rms = 5.0 / std::sqrt(2.0);
  EXPECT_LT(jitter_metric(t, 50, kUnit), 0.05 * signal_rms);
}

TEST(JitterMetric, ScalesWithCalibrationAndRequiresDensity) {
  const auto t = xy_trajectory(white(300, 1, 3), std::vector<double>(300, 0.0));
  EXPECT_NEAR(jitter_metric(t, 50, Calibration{0.1, 5.0, 50}), 0.1 * jitter_metric(t, 50, kUnit), 1e-12);
  Trajectory holes = t;
  holes.erase(100);
  EXPECT_THROW(jitter_metric(holes, 50, kUnit), ContractError);
}

}  // namespace
}  // namespace ustrack
