#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ccf/errors.hpp"
#include "ccf/geodata.hpp"
#include "ccf/png.hpp"
#include "ccf/synth.hpp"

namespace ccf {
namespace {

namespace fs = std::filesystem;

class GeodataFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ccf_geodata_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

Scene zero_scene(std::size_t w, std::size_t h, std::size_t bands) {
  Scene s;
  s.width = w;
  s.height = h;
  s.n_bands = bands;
  s.geotransform = {0.0, 1.0, 0.0, 0.0, 0.0, -1.0};
  s.nodata = 65535;
  s.data.assign(w * h * bands, 0);
  return s;
}

TEST_F(GeodataFiles, ZeroSceneRoundTrip) {
  const Scene s = zero_scene(2, 2, 13);
  write_scene(s, path("s.json"), path("s.bsq"));
  EXPECT_EQ(fs::file_size(path("s.bsq")), 2u * 2u * 13u * 2u);
  const Scene back = load_scene(path("s.json"), path("s.bsq"));
  EXPECT_EQ(back.width, 2u);
  EXPECT_EQ(back.n_bands, 13u);
  EXPECT_EQ(back.data, s.data);
}

TEST_F(GeodataFiles, SyntheticSceneRoundTripIsExact) {
  const auto synthetic = generate_scene(quadrant_layout(9, 7), default_prototypes(), 5);
  write_scene(synthetic.scene, path("s.json"), path("s.bsq"));
  const Scene back = load_scene(path("s.json"), path("s.bsq"));
  EXPECT_EQ(back.data, synthetic.scene.data);
  EXPECT_EQ(back.geotransform.as_array(), synthetic.scene.geotransform.as_array());
  EXPECT_EQ(back.nodata, synthetic.scene.nodata);
  EXPECT_EQ(scene_header_json(back), scene_header_json(synthetic.scene));
}

TEST_F(GeodataFiles, LittleEndianLayout) {
  Scene s = zero_scene(1, 1, 2);
  s.data = {0x1234, 0xBEEF};
  write_scene(s, path("s.json"), path("s.bsq"));
  std::ifstream in(path("s.bsq"), std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes, (std::vector<unsigned char>{0x34, 0x12, 0xEF, 0xBE}));
}

TEST_F(GeodataFiles, ShortDataFileNamesByteCounts) {
  const Scene s = zero_scene(2, 2, 13);
  write_scene(s, path("s.json"), path("s.bsq"));
  fs::resize_file(path("s.bsq"), 2 * 2 * 13 * 2 - 2);
  try {
    load_scene(path("s.json"), path("s.bsq"));
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("expected 104 bytes"), std::string::npos) << what;
    EXPECT_NE(what.find("found 102"), std::string::npos) << what;
  }
}

TEST_F(GeodataFiles, HeaderErrors) {
  write("bsq", "");
  write("a.json", R"({"width":1,"height":1,"bands":1,"dtype":"f32","order":"band_sequential","geotransform":[0,1,0,0,0,-1],"nodata":0})");
  EXPECT_THROW(load_scene(path("a.json"), path("bsq")), LoadError);
  write("b.json", R"({"width":1,"height":1,"dtype":"u16","order":"band_sequential","geotransform":[0,1,0,0,0,-1],"nodata":0})");
  try {
    load_scene(path("b.json"), path("bsq"));
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("bands"), std::string::npos);
  }
  write("c.json", R"({"width":1,"height":1,"bands":1,"dtype":"u16","order":"band_sequential","geotransform":[0,1,0],"nodata":0})");
  EXPECT_THROW(load_scene(path("c.json"), path("bsq")), LoadError);
  EXPECT_THROW(load_scene(path("missing.json"), path("bsq")), LoadError);
}

TEST(GeoToPixel, HandInvertedAffine) {
  const Scene s = zero_scene(10, 10, 1);
  EXPECT_EQ(geo_to_pixel(s, 2.5, -3.5), (PixelCoord{2, 3}));
  EXPECT_EQ(geo_to_pixel(s, 0.0, 0.0), (PixelCoord{0, 0}));
  EXPECT_FALSE(geo_to_pixel(s, -0.1, -1.0).has_value());
  EXPECT_FALSE(geo_to_pixel(s, 10.0, -1.0).has_value());
  EXPECT_FALSE(geo_to_pixel(s, 1.0, 0.5).has_value());
}

TEST(GeoToPixel, RotatedTransform) {
  Scene s = zero_scene(20, 20, 1);
  s.geotransform = {100.0, 2.0, 0.5, 50.0, 0.25, -2.0};
  for (std::size_t r = 0; r < 20; ++r) {
    for (std::size_t c = 0; c < 20; ++c) {
      const auto [x, y] = pixel_to_geo(s, c, r);
      EXPECT_EQ(geo_to_pixel(s, x, y), (PixelCoord{c, r}));
    }
  }
}

TEST(GeoToPixel, CenterRoundTripOnSyntheticTransform) {
  const auto synthetic = generate_scene(quadrant_layout(64, 64), default_prototypes(), 1);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      const auto [lon, lat] = pixel_to_geo(synthetic.scene, c, r);
      ASSERT_EQ(geo_to_pixel(synthetic.scene, lon, lat), (PixelCoord{c, r}));
    }
  }
}

TEST(GeoToPixel, SingularTransformIsConfigError) {
  Scene s = zero_scene(2, 2, 1);
  s.geotransform = {0.0, 1.0, 2.0, 0.0, 0.5, 1.0};
  EXPECT_THROW(geo_to_pixel(s, 0.0, 0.0), ConfigError);
}

TEST(PixelSpectrum, ValuesAndNodataFlag) {
  Scene s = zero_scene(2, 1, 3);
  for (std::size_t b = 0; b < 3; ++b) {
    s.value(b, 0, 0) = static_cast<std::uint16_t>(100 + b);
    s.value(b, 1, 0) = static_cast<std::uint16_t>(200 + b);
  }
  s.value(1, 1, 0) = s.nodata;
  const PixelSpectrum a = pixel_spectrum(s, 0, 0);
  EXPECT_EQ(a.values, (std::vector<std::uint16_t>{100, 101, 102}));
  EXPECT_FALSE(a.has_nodata);
  const PixelSpectrum b = pixel_spectrum(s, 1, 0);
  EXPECT_EQ(b.values.size(), 3u);
  EXPECT_TRUE(b.has_nodata);
  EXPECT_THROW(pixel_spectrum(s, 2, 0), InputError);
}

TEST(Points, OneValidRow) {
  const auto points = parse_points("source_id,lon,lat,survey_class\nA1,36.8,-1.3,Thatch or grass\n");
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].source_id, "A1");
  EXPECT_DOUBLE_EQ(points[0].lon, 36.8);
  EXPECT_DOUBLE_EQ(points[0].lat, -1.3);
  EXPECT_EQ(points[0].survey_class, "Thatch or grass");
}

TEST(Points, LatitudeOutOfRange) {
  try {
    parse_points("source_id,lon,lat,survey_class\nA1,1,2,Tiles\nA2,36.8,95,Tiles\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(Points, CrlfAndQuotedFields) {
  const auto points = parse_points(
      "source_id,lon,lat,survey_class\r\n"
      "A1,1.5,2.5,\"Metal, tin or zinc\"\r\n"
      "\"A \"\"2\"\"\",3,4,Could not tell/could not see\r\n");
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].survey_class, "Metal, tin or zinc");
  EXPECT_EQ(points[1].source_id, "A \"2\"");
  EXPECT_EQ(points[1].survey_class, "Could not tell/could not see");
}

TEST(Points, MalformedRows) {
  EXPECT_THROW(parse_points(""), ParseError);
  EXPECT_THROW(parse_points("id,x,y,z\n"), ParseError);
  EXPECT_THROW(parse_points("source_id,lon,lat,survey_class\nA1,abc,2,Tiles\n"), ParseError);
  EXPECT_THROW(parse_points("source_id,lon,lat,survey_class\nA1,1,2\n"), ParseError);
  EXPECT_THROW(parse_points("source_id,lon,lat,survey_class\nA1,1,2,\"open\n"), ParseError);
}

TEST_F(GeodataFiles, PointsWriteThenLoad) {
  const std::vector<LabeledPoint> points = {{"p,1", 36.780123456789, -1.31, "Metal, tin or zinc"},
                                            {"p2", -0.1, 0.2, "Shingles"}};
  write_points(points, path("p.csv"));
  const auto back = load_points(path("p.csv"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].source_id, "p,1");
  EXPECT_EQ(back[0].lon, points[0].lon);
  EXPECT_EQ(back[0].survey_class, points[0].survey_class);
}

TEST(Mask, UniformImages) {
  Image8 informal{3, 2, 1, std::vector<std::uint8_t>(6, 255)};
  GroundTruthMask m = decode_mask(encode_png(informal));
  for (MaskValue v : m.values) EXPECT_EQ(v, MaskValue::kInformal);
  Image8 unknown{3, 2, 1, std::vector<std::uint8_t>(6, 128)};
  m = decode_mask(encode_png(unknown));
  for (MaskValue v : m.values) EXPECT_EQ(v, MaskValue::kUnknown);
}

TEST(Mask, Checkerboard) {
  Image8 image{4, 3, 1, {}};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) image.pixels.push_back((r + c) % 2 == 0 ? 255 : 0);
  }
  const GroundTruthMask m = decode_mask(encode_png(image));
  ASSERT_EQ(m.width, 4u);
  ASSERT_EQ(m.height, 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(m.at(c, r), (r + c) % 2 == 0 ? MaskValue::kInformal : MaskValue::kEnvironment);
    }
  }
}

TEST(Mask, RejectsOtherValuesAndRgb) {
  Image8 bad{2, 1, 1, {0, 77}};
  EXPECT_THROW(decode_mask(encode_png(bad)), LoadError);
  Image8 rgb{1, 1, 3, {255, 255, 255}};
  EXPECT_THROW(decode_mask(encode_png(rgb)), LoadError);
  EXPECT_THROW(decode_mask({1, 2, 3}), LoadError);
}

}  // namespace
}  // namespace ccf
