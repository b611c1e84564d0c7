#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ustrack/error.hpp"
#include "ustrack/rstc.hpp"

namespace ustrack {
namespace {

TEST(SigmoidWeights, TwoFrames) {
  EXPECT_EQ(sigmoid_weights(2, 10.0), (std::vector<double>{1.0, 0.0}));
}

TEST(SigmoidWeights, ThreeFramesAnyAlpha) {
  for (double alpha : {0.1, 1.0, 10.0, 50.0}) {
    EXPECT_EQ(sigmoid_weights(3, alpha), (std::vector<double>{1.0, 0.5, 0.0})) << alpha;
  }
}

TEST(SigmoidWeights, LawHoldsExactly) {
  for (int len : {2, 3, 4, 7, 30, 31, 100}) {
    for (double alpha : {0.5, 10.0, 40.0}) {
      const auto w = sigmoid_weights(len, alpha);
      ASSERT_EQ(w.size(), static_cast<std::size_t>(len));
      EXPECT_EQ(w.front(), 1.0);
      EXPECT_EQ(w.back(), 0.0);
      for (int k = 0; k < len; ++k) {
        EXPECT_EQ(w[k] + w[len - 1 - k], 1.0) << "L=" << len << " k=" << k;
        if (k + 1 < len) EXPECT_GT(w[k], w[k + 1]);
      }
    }
  }
}

TEST(SigmoidWeights, MatchesRescaledLogisticFormula) {
  const int len = 30;
  const double alpha = 10.0;
  auto raw = [&](double s) { return 1.0 / (1.0 + std::exp(alpha * (s - 0.5))); };
  const double r0 = raw(0.0), r1 = raw(1.0);
  const auto w = sigmoid_weights(len, alpha);
  for (int k = 0; k < len; ++k) {
    EXPECT_NEAR(w[k], (raw(k / double(len - 1)) - r1) / (r0 - r1), 1e-12);
  }
}

TEST(SigmoidWeights, RejectsBadArguments) {
  EXPECT_THROW(sigmoid_weights(1, 10.0), ContractError);
  EXPECT_THROW(sigmoid_weights(5, 0.0), ContractError);
  EXPECT_THROW((RstcConfig{.alpha = -1.0}.validate()), ContractError);
}

TEST(RstcTracklet, StaticConsistentAnchors) {
  const FrameSequence seq = oracle::static_speckle(48, 48, 12, 1);
  const Point2 p{20.25, 23.5};
  const Tracklet t = rstc_tracklet(seq, 1, 10, p, p, RstcConfig{});
  ASSERT_EQ(t.estimates.size(), 10u);
  for (int f = 1; f <= 10; ++f) {
    EXPECT_EQ(t.at(f), p);
    EXPECT_TRUE(t.valid_at(f));
  }
}

TEST(RstcTracklet, StaticInconsistentAnchorsBlendLinearlyInWeight) {
  const FrameSequence seq = oracle::static_speckle(48, 48, 10, 2);
  const Point2 pa{20, 20}, pb{24, 18};
  const Tracklet t = rstc_tracklet(seq, 0, 9, pa, pb, RstcConfig{});
  const auto w = sigmoid_weights(10, 10.0);
  for (int k = 0; k < 10; ++k) {
    EXPECT_NEAR(t.at(k).x, w[k] * pa.x + (1 - w[k]) * pb.x, 1e-12);
    EXPECT_NEAR(t.at(k).y, w[k] * pa.y + (1 - w[k]) * pb.y, 1e-12);
  }
}

TEST(RstcTracklet, TranslatingSpeckleFollowsTheTrueLine) {
  const auto r = oracle::translating_speckle(96, 64, 30, {1, 0}, 3, {{20, 32}});
  const Trajectory& truth = r.truth.labels.at("0");
  const Tracklet t = rstc_tracklet(r.sequence, 0, 29, truth.at(0), truth.at(29), RstcConfig{});
  for (int f = 0; f <= 29; ++f) {
    EXPECT_LT(norm(t.at(f) - truth.at(f)), 0.3) << "frame " << f;
  }
}

TEST(RstcTracklet, EndpointsAreAnchoredExactly) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(12.0, 36.0);
  const auto r = oracle::translating_speckle(48, 48, 12, {0.4, -0.3}, 4, {});
  for (int trial = 0; trial < 10; ++trial) {
    const Point2 pa{u(rng), u(rng)}, pb{u(rng), u(rng)};
    const int a = trial % 4, b = a + 2 + trial % 7;
    const Tracklet t = rstc_tracklet(r.sequence, a, b, pa, pb, RstcConfig{});
    EXPECT_EQ(t.at(a), pa);
    EXPECT_EQ(t.at(b), pb);
    EXPECT_EQ(t.length(), b - a + 1);
  }
}

TEST(RstcTracklet, TimeReversalSymmetry) {
  const auto r = oracle::translating_speckle(64, 64, 20, {0.6, 0.25}, 5, {{24, 30}});
  const FrameSequence rev = r.sequence.reversed();
  const int n = r.sequence.count();
  const Trajectory& truth = r.truth.labels.at("0");
  const int a = 2, b = 17;
  const Point2 pa = truth.at(a) + Point2{0.3, -0.2}, pb = truth.at(b) + Point2{-0.4, 0.1};
  const Tracklet fwd = rstc_tracklet(r.sequence, a, b, pa, pb, RstcConfig{});
  const Tracklet bwd = rstc_tracklet(rev, n - 1 - b, n - 1 - a, pb, pa, RstcConfig{});
  for (int f = a; f <= b; ++f) {
    const Point2 q = bwd.at(n - 1 - f);
    EXPECT_NEAR(q.x, fwd.at(f).x, 1e-6);
    EXPECT_NEAR(q.y, fwd.at(f).y, 1e-6);
  }
}

TEST(RstcTracklet, AdjacentAnchorsHaveNoInterior) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 4, 6);
  const Tracklet t = rstc_tracklet(seq, 1, 2, {10, 10}, {11, 11}, RstcConfig{});
  ASSERT_EQ(t.estimates.size(), 2u);
  EXPECT_EQ(t.at(1), (Point2{10, 10}));
  EXPECT_EQ(t.at(2), (Point2{11, 11}));
}

TEST(RstcTracklet, LostTracksFlagInteriorInvalid) {
  std::vector<Frame> frames;
  for (int t = 0; t < 6; ++t) frames.emplace_back(t, 32, 32, std::vector<float>(32 * 32, 0.5f));
  const FrameSequence flat(std::move(frames), Calibration{});
  const Tracklet t = rstc_tracklet(flat, 0, 5, {10, 10}, {12, 10}, RstcConfig{});
  for (int f = 1; f < 5; ++f) EXPECT_FALSE(t.valid_at(f));
  const auto w = sigmoid_weights(6, 10.0);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(t.at(k).x, 10 * w[k] + 12 * (1 - w[k]), 1e-12);
}

TEST(RstcTracklet, RejectsBadAnchors) {
  const FrameSequence seq = oracle::static_speckle(32, 32, 4, 6);
  EXPECT_THROW(rstc_tracklet(seq, 2, 2, {}, {}, RstcConfig{}), ContractError);
  EXPECT_THROW(rstc_tracklet(seq, 0, 4, {}, {}, RstcConfig{}), ContractError);
}

}  // namespace
}  // namespace ustrack
