#include <gtest/gtest.h>

#include <random>

#include "temp_dir.hpp"
#include "ustrack/annotstore.hpp"
#include "ustrack/error.hpp"

namespace ustrack {
namespace {

using testing::TempDir;

AnnotationLayer random_layer(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 63.0);
  std::uniform_int_distribution<int> frame(0, 99);
  AnnotationLayer l{"layer" + std::to_string(seed), {}};
  const int labels = 1 + static_cast<int>(seed % 11);
  for (int i = 0; i < labels; ++i) {
    Trajectory& t = l.labels[std::to_string(i * 3 % 17)];
    for (int k = 0; k < 20; ++k) t[frame(rng)] = {coord(rng), coord(rng)};
  }
  l.labels["tip"][5] = {0.1, 1.0 / 3.0};
  return l;
}

TEST(Serialize, CanonicalLayout) {
  AnnotationLayer l{"demo", {}};
  l.labels["10"][12] = {1.5, 2};
  l.labels["10"][3] = {0.1, 7};
  l.labels["2"][0] = {4, 5.25};
  l.labels["2"];
  EXPECT_EQ(serialize_layer(l),
            "{\n"
            "  \"schema\": \"ustrack-layer/1\",\n"
            "  \"layer\": \"demo\",\n"
            "  \"labels\": {\n"
            "    \"2\": {\n"
            "      \"0\": [4, 5.25]\n"
            "    },\n"
            "    \"10\": {\n"
            "      \"3\": [0.1, 7],\n"
            "      \"12\": [1.5, 2]\n"
            "    }\n"
            "  }\n"
            "}\n");
}

TEST(Serialize, EmptyLabelRoundTrips) {
  AnnotationLayer l{"e", {}};
  l.labels["0"];
  EXPECT_EQ(parse_layer(serialize_layer(l)), l);
}

TEST(Serialize, RoundTripIsExactForRandomLayers) {
  for (unsigned seed = 0; seed < 50; ++seed) {
    const AnnotationLayer l = random_layer(seed);
    const std::string text = serialize_layer(l);
    const AnnotationLayer back = parse_layer(text);
    ASSERT_EQ(back, l) << seed;
    EXPECT_EQ(serialize_layer(back), text);
  }
}

TEST(SaveLoad, RoundTripAndByteIdentity) {
  TempDir dir;
  const AnnotationLayer l = random_layer(7);
  save_layer(l, dir / "a.annot.json");
  save_layer(l, dir / "b.annot.json");
  EXPECT_EQ(testing::slurp(dir / "a.annot.json"), testing::slurp(dir / "b.annot.json"));
  EXPECT_EQ(load_layer(dir / "a.annot.json"), l);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
}

TEST(Parse, AcceptsNonCanonicalInput) {
  const AnnotationLayer l = parse_layer(
      R"({"labels": {"1": {"7": [3, 4.5]}}, "layer": "x", "schema": "ustrack-layer/1"})");
  EXPECT_EQ(l.name, "x");
  EXPECT_EQ(l.labels.at("1").at(7), (Point2{3, 4.5}));
}

TEST(Parse, MalformedJsonReportsLocation) {
  try {
    parse_layer("{\n  \"schema\": \"ustrack-layer/1\",\n  \"layer\": oops\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Parse, SchemaMismatchIsVersionError) {
  EXPECT_THROW(parse_layer(R"({"schema": "ustrack-layer/2", "layer": "x", "labels": {}})"), VersionError);
  EXPECT_THROW(parse_layer(R"({"layer": "x", "labels": {}})"), ParseError);
}

TEST(Parse, StructuralProblems) {
  EXPECT_THROW(parse_layer(R"({"schema": "ustrack-layer/1", "layer": "", "labels": {}})"),
               ValidationError);
  EXPECT_THROW(parse_layer(R"({"schema": "ustrack-layer/1", "layer": "x", "labels": {"0": {"a": [1, 2]}}})"),
               ParseError);
  EXPECT_THROW(parse_layer(R"({"schema": "ustrack-layer/1", "layer": "x", "labels": {"0": {"1": [1]}}})"),
               ParseError);
  EXPECT_THROW(parse_layer(R"({"schema": "ustrack-layer/1", "layer": "x"})"), ParseError);
}

TEST(Parse, OutOfBoundsPointNamesLabelAndFrame) {
  const std::string text =
      R"({"schema": "ustrack-layer/1", "layer": "x", "labels": {"4": {"17": [80, 2]}}})";
  EXPECT_NO_THROW(parse_layer(text));
  try {
    parse_layer(text, FrameBounds{64, 64, 30});
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'4'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("17"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_layer(text, FrameBounds{100, 64, 10}), ValidationError);
}

TEST(LoadLayer, MissingFileNamesPath) {
  TempDir dir;
  try {
    load_layer(dir / "missing.annot.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing.annot.json"), std::string::npos);
  }
}

TEST(KeypointCsv, ImportWithLikelihoodAndPaths) {
  const std::string csv =
      "scorer,net,net,net,net,net,net\n"
      "bodyparts,0,0,0,tip,tip,tip\n"
      "coords,x,y,likelihood,x,y,likelihood\n"
      "labeled-data/vid/img0000.png,1.5,2.5,0.9,10,11,0.8\n"
      "labeled-data/vid/img0001.png,,,,12,13,0.7\n"
      "labeled-data/vid/img0002.png,3,4,0.99,,,\n";
  const AnnotationLayer l = import_keypoint_csv(csv, "model");
  EXPECT_EQ(l.name, "model");
  ASSERT_EQ(l.labels.size(), 2u);
  EXPECT_EQ(l.labels.at("0").size(), 2u);
  EXPECT_EQ(l.labels.at("0").at(2), (Point2{3, 4}));
  EXPECT_EQ(l.labels.at("tip").at(1), (Point2{12, 13}));
}

TEST(KeypointCsv, ImportWithIndividualsRow) {
  const std::string csv =
      "scorer,s,s\nindividuals,m1,m1\nbodyparts,a,a\ncoords,x,y\n0,1,2\n4,5,6\n";
  const AnnotationLayer l = import_keypoint_csv(csv, "m");
  EXPECT_EQ(l.labels.at("a").at(4), (Point2{5, 6}));
}

TEST(KeypointCsv, ExportImportRoundTrip) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    AnnotationLayer l = random_layer(seed);
    const AnnotationLayer back = import_keypoint_csv(export_keypoint_csv(l, 100), l.name);
    EXPECT_EQ(back, l) << seed;
  }
}

TEST(KeypointCsv, MalformedHeaderAndFrameCells) {
  EXPECT_THROW(import_keypoint_csv("a,b\n1,2\n", "x"), ParseError);
  EXPECT_THROW(import_keypoint_csv("scorer,s,s\nbodyparts,a,a\ncoords,x,y\nnope,1,2\n", "x"),
               ParseError);
}

TEST(WriteFileAtomic, ReplacesExistingFile) {
  TempDir dir;
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(testing::slurp(dir / "f.txt"), "two");
}

}  // namespace
}  // namespace ustrack
