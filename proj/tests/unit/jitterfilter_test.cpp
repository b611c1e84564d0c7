#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "ustrack/error.hpp"
#include "ustrack/jitterfilter.hpp"
#include "ustrack/synthgen.hpp"

namespace ustrack {
namespace {

int enumerate_coverage(int t, int w, int n) {
  int c = 0;
  for (int s = 0; s <= n - w; ++s) c += (s + 1 <= t && t <= s + w - 2) ? 1 : 0;
  return c;
}

TEST(Coverage, WorkedExamples) {
  EXPECT_EQ(coverage_count(50, 30, 100), 28);
  EXPECT_EQ(coverage_count(0, 30, 100), 0);
  EXPECT_EQ(coverage_count(1, 30, 100), 1);
  EXPECT_EQ(coverage_count(99, 30, 100), 0);
}

TEST(Coverage, MatchesEnumeration) {
  for (int n = 3; n <= 40; ++n)
    for (int w = 3; w <= n; ++w)
      for (int t = 0; t < n; ++t) {
        const int c = coverage_count(t, w, n);
        ASSERT_EQ(c, enumerate_coverage(t, w, n)) << t << " " << w << " " << n;
        ASSERT_LE(c, w - 2);
      }
}

TEST(Coverage, RejectsBadArguments) {
  EXPECT_THROW(coverage_count(0, 2, 10), ContractError);
  EXPECT_THROW(coverage_count(0, 11, 10), ContractError);
  EXPECT_THROW(coverage_count(10, 5, 10), ContractError);
}

TEST(FilterConfig, WindowFromSeconds) {
  EXPECT_EQ(FilterConfig::window_from_seconds(0.6, 50.0), 30);
  EXPECT_EQ(FilterConfig::window_from_seconds(0.6, 30.0), 18);
  EXPECT_THROW(FilterConfig::window_from_seconds(0.0, 50.0), ContractError);
  EXPECT_THROW((FilterConfig{.window_frames = 2}.validate()), ContractError);
}

TEST(FilterTrajectory, StaticSequenceConstantInputIsIdentity) {
  const FrameSequence seq = oracle::static_speckle(48, 48, 40, 1);
  const Point2 p{22.5, 19.75};
  const FilteredTrajectory out = filter_trajectory(seq, oracle::constant_trajectory(p, 40),
                                                   FilterConfig{.window_frames = 10});
  ASSERT_EQ(out.points.size(), 40u);
  for (int t = 0; t < 40; ++t) {
    EXPECT_EQ(out.points[t], p);
    EXPECT_EQ(out.coverage[t], coverage_count(t, 10, 40));
  }
}

TEST(FilterTrajectory, SpikeMatchesBruteForceOracle) {
  const FrameSequence seq = oracle::static_speckle(48, 48, 30, 2);
  Trajectory in = oracle::constant_trajectory({24, 24}, 30);
  in[15] = {27, 22};
  const FilterConfig cfg{.window_frames = 8};
  const FilteredTrajectory got = filter_trajectory(seq, in, cfg);
  const FilteredTrajectory want = oracle::brute_force_filter(seq, in, cfg);
  for (int t = 0; t < 30; ++t) {
    EXPECT_NEAR(got.points[t].x, want.points[t].x, 1e-9) << t;
    EXPECT_NEAR(got.points[t].y, want.points[t].y, 1e-9) << t;
    EXPECT_EQ(got.coverage[t], want.coverage[t]);
  }
  // The spike is only an anchor for windows that start or end at 15; every
  // other tracklet covering 15 is exactly constant.
  EXPECT_LT(norm(got.points[15] - Point2{24, 24}), norm(in[15] - Point2{24, 24}));
}

TEST(FilterTrajectory, MatchesBruteForceOnJitteredMotion) {
  for (int w : {5, 12}) {
    const auto r = oracle::translating_speckle(64, 64, 40, {0.5, 0.2}, 3, {{20, 25}});
    const Trajectory in = add_jitter(r.truth.labels.at("0"), 0.8, 3);
    const FilterConfig cfg{.window_frames = w};
    const FilteredTrajectory got = filter_trajectory(r.sequence, in, cfg);
    const FilteredTrajectory want = oracle::brute_force_filter(r.sequence, in, cfg);
    for (int t = 0; t < 40; ++t) {
      EXPECT_NEAR(got.points[t].x, want.points[t].x, 1e-9);
      EXPECT_NEAR(got.points[t].y, want.points[t].y, 1e-9);
    }
    EXPECT_EQ(got.points.front(), in.at(0));
    EXPECT_EQ(got.points.back(), in.at(39));
  }
}

TEST(FilterTrajectory, ReducesJitterAgainstTruth) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = oracle::translating_speckle(96, 64, 100, {0.3, 0.0}, seed, {{20, 32}});
    const Trajectory& truth = r.truth.labels.at("0");
    const Trajectory in = add_jitter(truth, 1.0, seed);
    const FilteredTrajectory out = filter_trajectory(r.sequence, in, FilterConfig{});
    double e_in = 0, e_out = 0;
    for (int t = 0; t < 100; ++t) {
      e_in += std::pow(norm(in.at(t) - truth.at(t)), 2);
      e_out += std::pow(norm(out.points[t] - truth.at(t)), 2);
    }
    EXPECT_LT(e_out, e_in) << "seed " << seed;
  }
}

TEST(FilterTrajectory, IndependentOfWorkerCount) {
  const auto r = oracle::translating_speckle(64, 64, 60, {0.4, 0.1}, 4, {{22, 30}});
  const Trajectory in = add_jitter(r.truth.labels.at("0"), 1.0, 9);
  ::setenv("USTRACK_THREADS", "1", 1);
  const FilteredTrajectory one = filter_trajectory(r.sequence, in, FilterConfig{.window_frames = 9});
  ::unsetenv("USTRACK_THREADS");
  const FilteredTrajectory many = filter_trajectory(r.sequence, in, FilterConfig{.window_frames = 9});
  for (int t = 0; t < 60; ++t) {
    EXPECT_NEAR(one.points[t].x, many.points[t].x, 1e-9);
    EXPECT_NEAR(one.points[t].y, many.points[t].y, 1e-9);
  }
}

TEST(FilterTrajectory, ReportsProgress) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 50, 5);
  int last_done = 0, last_total = 0;
  filter_trajectory(seq, oracle::constant_trajectory({16, 16}, 50), FilterConfig{.window_frames = 6},
                    [&](int done, int total) {
                      EXPECT_GE(done, last_done);
                      last_done = done;
                      last_total = total;
                    });
  EXPECT_EQ(last_total, 45);
  EXPECT_EQ(last_done, 45);
}

TEST(FilterTrajectory, WindowLongerThanSequence) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 20, 6);
  try {
    filter_trajectory(seq, oracle::constant_trajectory({16, 16}, 20), FilterConfig{});
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("window exceeds sequence length"), std::string::npos);
  }
}

TEST(FilterTrajectory, SparseInputNamesMissingFrames) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 12, 7);
  Trajectory in = oracle::constant_trajectory({16, 16}, 12);
  in.erase(4);
  in.erase(7);
  try {
    filter_trajectory(seq, in, FilterConfig{.window_frames = 5});
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("4, 7"), std::string::npos) << e.what();
  }
}

TEST(FilterLayer, EmptyLayer) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 10, 8);
  const AnnotationLayer out = filter_layer(seq, AnnotationLayer{"model", {}}, FilterConfig{.window_frames = 5});
  EXPECT_EQ(out.name, "model_lkrstc");
  EXPECT_TRUE(out.labels.empty());
}

TEST(FilterLayer, LabelsAreFilteredIndependently) {
  const auto r = oracle::translating_speckle(64, 64, 30, {0.5, 0}, 9, {{15, 20}, {25, 40}});
  AnnotationLayer in{"model", {}};
  in.labels["0"] = add_jitter(r.truth.labels.at("0"), 0.7, 1);
  in.labels["1"] = add_jitter(r.truth.labels.at("1"), 0.7, 2);
  const FilterConfig cfg{.window_frames = 8};
  const AnnotationLayer out = filter_layer(r.sequence, in, cfg);
  EXPECT_EQ(out.name, "model_lkrstc");
  for (const std::string id : {"0", "1"}) {
    const FilteredTrajectory solo = filter_trajectory(r.sequence, in.labels.at(id), cfg);
    for (int t = 0; t < 30; ++t) EXPECT_EQ(out.labels.at(id).at(t), solo.points[t]);
  }
}

TEST(FilterLayer, ErrorsNameTheLabel) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 10, 10);
  AnnotationLayer in{"model", {}};
  in.labels["3"] = oracle::constant_trajectory({16, 16}, 10);
  in.labels["4"] = {{0, {16, 16}}};
  try {
    filter_layer(seq, in, FilterConfig{.window_frames = 5});
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("label '4'"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace ustrack
