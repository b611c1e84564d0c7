#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "temp_dir.hpp"
#include "ustrack/error.hpp"
#include "ustrack/media.hpp"
#include "ustrack/synthgen.hpp"

namespace ustrack {
namespace {

using testing::TempDir;

Frame from_fn(int w, int h, auto fn) {
  std::vector<float> px(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y) * w + x] = static_cast<float>(fn(x, y));
  return Frame(0, w, h, std::move(px));
}

Frame random_frame(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  return from_fn(w, h, [&](int, int) { return u(rng); });
}

TEST(Frame, RejectsWrongSizeAndRange) {
  EXPECT_THROW(Frame(0, 2, 2, std::vector<float>(3, 0.5f)), StructuralError);
  EXPECT_THROW(Frame(0, 1, 1, std::vector<float>{1.5f}), ContractError);
}

TEST(Calibration, RequiresPositiveValues) {
  EXPECT_NO_THROW((Calibration{0.1, 0.2, 30}.validate()));
  EXPECT_THROW((Calibration{0.0, 0.2, 30}.validate()), ContractError);
  EXPECT_THROW((Calibration{0.1, 0.2, -1}.validate()), ContractError);
}

TEST(SampleBilinear, ExactAtGridNodes) {
  const Frame f = random_frame(8, 8, 1);
  EXPECT_EQ(sample_bilinear(f, {3, 4}), static_cast<double>(f.at(3, 4)));
}

TEST(SampleBilinear, ConstantFrameIsConstantEverywhere) {
  const Frame f = from_fn(9, 7, [](int, int) { return 0.375; });
  for (Point2 p : {Point2{0.3, 0.7}, Point2{-4.2, 3.3}, Point2{100.5, -2}, Point2{8, 6}}) {
    EXPECT_EQ(sample_bilinear(f, p), 0.375);
  }
}

TEST(SampleBilinear, HandEvaluatedQuarterPoint) {
  const Frame f = from_fn(2, 2, [](int x, int) { return x; });
  EXPECT_DOUBLE_EQ(sample_bilinear(f, {0.25, 0.0}), 0.25);
  EXPECT_DOUBLE_EQ(sample_bilinear(f, {0.25, 0.6}), 0.25);
}

TEST(SampleBilinear, ClampsOutsideTheImage) {
  const Frame f = random_frame(5, 5, 2);
  EXPECT_EQ(sample_bilinear(f, {-3.0, 2.0}), static_cast<double>(f.at(0, 2)));
  EXPECT_EQ(sample_bilinear(f, {2.0, 9.0}), static_cast<double>(f.at(2, 4)));
}

TEST(SampleBilinear, LipschitzInMaxAdjacentDifference) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 15.0);
  for (unsigned trial = 0; trial < 20; ++trial) {
    const Frame f = random_frame(16, 16, 100 + trial);
    double lip = 0.0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (x + 1 < 16) lip = std::max(lip, std::abs(double(f.at(x + 1, y)) - f.at(x, y)));
        if (y + 1 < 16) lip = std::max(lip, std::abs(double(f.at(x, y + 1)) - f.at(x, y)));
      }
    for (int k = 0; k < 50; ++k) {
      const Point2 p{coord(rng), coord(rng)}, q{coord(rng), coord(rng)};
      // L1 distance bounds the bilinear patch walk; Euclidean is within sqrt(2) of it.
      const double bound = lip * (std::abs(p.x - q.x) + std::abs(p.y - q.y)) + 1e-12;
      EXPECT_LE(std::abs(sample_bilinear(f, p) - sample_bilinear(f, q)), bound);
    }
  }
}

TEST(Gradient, ConstantFrameHasZeroGradient) {
  const Frame f = from_fn(10, 10, [](int, int) { return 0.7; });
  const Gradient g = gradient(f, {4.3, 5.1});
  EXPECT_EQ(g.gx, 0.0);
  EXPECT_EQ(g.gy, 0.0);
}

TEST(Gradient, LinearRampInterior) {
  const int w = 33;
  const Frame f = from_fn(w, 8, [&](int x, int) { return x / double(w - 1); });
  for (double x : {1.0, 7.5, 20.25, 31.0}) {
    const Gradient g = gradient(f, {x, 3.0});
    EXPECT_NEAR(g.gx, 1.0 / (w - 1), 1e-7);
    EXPECT_EQ(g.gy, 0.0);
  }
}

TEST(Gradient, MatchesAnalyticPartialsOfProduct) {
  // I = x*y/1024 is exact in float for a 32x32 grid.
  const Frame f = from_fn(32, 32, [](int x, int y) { return x * y / 1024.0; });
  for (int y = 1; y < 31; y += 3)
    for (int x = 1; x < 31; x += 3) {
      const Gradient g = gradient(f, {double(x), double(y)});
      EXPECT_NEAR(g.gx, y / 1024.0, 1e-9);
      EXPECT_NEAR(g.gy, x / 1024.0, 1e-9);
    }
}

TEST(Pyramid, ConstantFrameStaysConstant) {
  const Frame f = from_fn(64, 64, [](int, int) { return 0.25; });
  const Pyramid p = build_pyramid(f, 3);
  ASSERT_EQ(p.level_count(), 3);
  for (const auto& level : p.levels)
    for (float v : level.data()) EXPECT_EQ(v, 0.25f);
}

TEST(Pyramid, LevelSizesHalveWithCeiling) {
  const Pyramid p = build_pyramid(random_frame(64, 64, 4), 3);
  ASSERT_EQ(p.level_count(), 3);
  EXPECT_EQ(p.levels[1].width(), 32);
  EXPECT_EQ(p.levels[2].height(), 16);

  const Pyramid odd = build_pyramid(random_frame(67, 35, 5), 3);
  ASSERT_EQ(odd.level_count(), 3);
  EXPECT_EQ(odd.levels[1].width(), 34);
  EXPECT_EQ(odd.levels[1].height(), 18);
  EXPECT_EQ(odd.levels[2].width(), 17);
  EXPECT_EQ(odd.levels[2].height(), 9);
}

TEST(Pyramid, RequestedLevelsClampToEightPixelMinimum) {
  EXPECT_EQ(max_pyramid_levels(64, 64), 4);
  EXPECT_EQ(max_pyramid_levels(7, 100), 1);
  const Pyramid p = build_pyramid(random_frame(64, 64, 6), 6);
  ASSERT_EQ(p.level_count(), 4);
  EXPECT_EQ(p.levels.back().width(), 8);
  EXPECT_THROW(build_pyramid(random_frame(8, 8, 1), 0), ContractError);
}

TEST(Pyramid, MeanIsPreserved) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Pyramid p = build_pyramid(random_frame(64, 48, 50 + seed), 3);
    auto mean = [](const Frame& f) {
      double s = 0.0;
      for (float v : f.data()) s += v;
      return s / f.data().size();
    };
    for (int l = 0; l + 1 < p.level_count(); ++l) {
      EXPECT_NEAR(mean(p.levels[l + 1]), mean(p.levels[l]), 2e-2);
    }
  }
}

// -- loading ---------------------------------------------------------------

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TEST(OpenSequence, DirectoryOfIdenticalPgms) {
  TempDir dir;
  const Frame f = make_speckle(64, 64, 9, SpeckleParams{});
  const auto bytes = encode_pgm(f);
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.pgm", i);
    write_bytes(dir / name, bytes);
  }
  const FrameSequence seq = open_sequence(dir.path());
  ASSERT_EQ(seq.count(), 10);
  EXPECT_EQ(seq.calibration().fps, 50.0);
  EXPECT_EQ(seq.calibration().mm_per_px_x, 1.0);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(seq[i].index(), i);
    EXPECT_TRUE(std::equal(seq[i].data().begin(), seq[i].data().end(), seq[0].data().begin()));
  }
  EXPECT_EQ(open_sequence(dir.path()), seq);  // deterministic reload
}

TEST(OpenSequence, RawBlobWithManifest) {
  TempDir dir;
  write_bytes(dir / "frames.y8", std::vector<std::uint8_t>(64 * 64 * 5, 51));
  testing::spit(dir / "manifest.json",
                R"({"width": 64, "height": 64, "count": 5, "fps": 25, "mm_per_px": [0.1, 0.2]})");
  const FrameSequence seq = open_sequence(dir.path());
  ASSERT_EQ(seq.count(), 5);
  EXPECT_EQ(seq.width(), 64);
  EXPECT_FLOAT_EQ(seq[4].at(10, 10), 0.2f);
  EXPECT_EQ(seq.calibration().fps, 25.0);
  EXPECT_EQ(seq.calibration().mm_per_px_y, 0.2);
}

TEST(OpenSequence, RawBlobOneByteShortIsStructuralError) {
  TempDir dir;
  write_bytes(dir / "frames.y8", std::vector<std::uint8_t>(64 * 64 * 5 - 1, 0));
  testing::spit(dir / "manifest.json", R"({"width": 64, "height": 64, "count": 5})");
  EXPECT_THROW(open_sequence(dir.path()), StructuralError);
}

TEST(OpenSequence, CorruptFrameNamesItsIndex) {
  TempDir dir;
  const auto good = encode_png(make_speckle(16, 16, 1, SpeckleParams{}));
  write_bytes(dir / "frame_000000.png", good);
  write_bytes(dir / "frame_000001.png", good);
  write_bytes(dir / "frame_000002.png", {1, 2, 3, 4});
  try {
    open_sequence(dir.path());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos) << e.what();
  }
}

TEST(OpenSequence, MismatchedDimensionsIsStructuralError) {
  TempDir dir;
  write_bytes(dir / "frame_000000.pgm", encode_pgm(make_speckle(16, 16, 1, SpeckleParams{})));
  write_bytes(dir / "frame_000001.pgm", encode_pgm(make_speckle(16, 12, 1, SpeckleParams{})));
  EXPECT_THROW(open_sequence(dir.path()), StructuralError);
}

TEST(OpenSequence, EmptyDirectoryIsLoadError) {
  TempDir dir;
  EXPECT_THROW(open_sequence(dir.path()), LoadError);
}

TEST(ImageCodecs, PngRoundTripsQuantizedFrames) {
  const Frame f = make_speckle(20, 11, 3, SpeckleParams{});
  const Frame back = decode_png(encode_png(f));
  ASSERT_EQ(back.width(), 20);
  ASSERT_EQ(back.height(), 11);
  for (std::size_t i = 0; i < f.data().size(); ++i) {
    EXPECT_NEAR(back.data()[i], f.data()[i], 0.5 / 255 + 1e-6);
  }
  EXPECT_EQ(decode_png(encode_png(back)), back);
}

TEST(ImageCodecs, PgmAsciiAndBinary) {
  const std::string ascii = "P2\n# comment\n3 1\n255\n0 128 255\n";
  const Frame f = decode_pgm({reinterpret_cast<const std::uint8_t*>(ascii.data()), ascii.size()});
  EXPECT_EQ(f.width(), 3);
  EXPECT_FLOAT_EQ(f.at(1, 0), 128.0f / 255.0f);
  EXPECT_EQ(decode_pgm(encode_pgm(f)), f);
}

TEST(WriteSequence, RoundTripsThroughDirectoryFormat) {
  TempDir dir;
  const FrameSequence seq = oracle::static_speckle(24, 16, 3, 5);
  write_sequence(seq, dir.path());
  const FrameSequence back = open_sequence(dir.path());
  ASSERT_EQ(back.count(), 3);
  EXPECT_EQ(back.calibration(), seq.calibration());
  EXPECT_EQ(back[1], decode_png(encode_png(seq[1])).with_index(1));
}

TEST(FrameSequence, ReversedReindexes) {
  const auto r = oracle::translating_speckle(32, 32, 4, {1, 0}, 1, {});
  const FrameSequence rev = r.sequence.reversed();
  EXPECT_EQ(rev[0].index(), 0);
  EXPECT_TRUE(std::equal(rev[0].data().begin(), rev[0].data().end(), r.sequence[3].data().begin()));
}

}  // namespace
}  // namespace ustrack
