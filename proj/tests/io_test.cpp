#include <gtest/gtest.h>

#include <png.h>

#include <fstream>
#include <random>

#include "csdseg/io.hpp"
#include "test_support.hpp"

using namespace csdseg;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() /
                     ("csdseg_io_" + std::string(::testing::UnitTest::GetInstance()
                                                     ->current_test_info()
                                                     ->name()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::string read_bytes(const fs::path& p) { return read_text(p); }

// 3x3 PGM with the given samples, written byte by byte.
std::string pgm8(const std::vector<int>& v) {
  std::string s = "P5\n3 3\n255\n";
  for (int x : v) s.push_back(static_cast<char>(x));
  return s;
}

std::string pgm16(const std::vector<int>& v) {
  std::string s = "P5\n# sixteen bit\n3 3\n65535\n";
  for (int x : v) {
    s.push_back(static_cast<char>((x >> 8) & 0xff));
    s.push_back(static_cast<char>(x & 0xff));
  }
  return s;
}

}  // namespace

TEST(LoadImage, EightBitExtremes) {
  const fs::path d = scratch_dir();
  write_bytes(d / "a.pgm", pgm8({255, 0, 128, 1, 2, 3, 4, 5, 6}));
  const GrayImage img = load_image(d / "a.pgm");
  EXPECT_EQ(img(0, 0), 1.0);
  EXPECT_EQ(img(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(img(2, 0), 128.0 / 255.0);
}

TEST(LoadImage, SixteenBitHandCraftedBytes) {
  const fs::path d = scratch_dir();
  write_bytes(d / "b.pgm", pgm16({32768, 0, 65535, 1, 2, 3, 4, 5, 6}));
  const GrayImage img = load_image(d / "b.pgm");
  EXPECT_NEAR(img(0, 0), 0.50001, 1e-5);
  EXPECT_DOUBLE_EQ(img(0, 0), 32768.0 / 65535.0);
  EXPECT_EQ(img(2, 0), 1.0);
}

TEST(LoadImage, SixteenBitPngMatchesLibpngLowLevelWriter) {
  // Written with libpng's row API, independent of the reader under test.
  const fs::path d = scratch_dir();
  const fs::path p = d / "c.png";
  FILE* fp = std::fopen(p.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, 4, 3, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(8);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) {
      const int v = y == 0 && x == 0 ? 32768 : 1000 * (x + 4 * y);
      row[2 * x] = static_cast<png_byte>(v >> 8);
      row[2 * x + 1] = static_cast<png_byte>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);

  const GrayImage img = load_image(p);
  EXPECT_DOUBLE_EQ(img(0, 0), 32768.0 / 65535.0);
  EXPECT_DOUBLE_EQ(img(3, 2), 11000.0 / 65535.0);
}

TEST(LoadImage, Errors) {
  const fs::path d = scratch_dir();
  EXPECT_THROW(load_image(d / "missing.png"), IoError);
  write_bytes(d / "junk.png", "not a png at all");
  EXPECT_THROW(load_image(d / "junk.png"), IoError);
  write_bytes(d / "zero.pgm", "P5\n0 3\n255\n");
  EXPECT_THROW(load_image(d / "zero.pgm"), IoError);
  write_bytes(d / "x.bmp", "BM");
  EXPECT_THROW(load_image(d / "x.bmp"), IoError);
}

TEST(LoadImage, MultiChannelNeedsChannelSelect) {
  const fs::path d = scratch_dir();
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 3;
  img.height = 3;
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> px(27);
  for (int i = 0; i < 9; ++i) {
    px[3 * i] = 10;
    px[3 * i + 1] = 255;
    px[3 * i + 2] = 0;
  }
  ASSERT_TRUE(png_image_write_to_file(&img, (d / "rgb.png").c_str(), 0, px.data(), 0, nullptr));
  EXPECT_THROW(load_image(d / "rgb.png"), IoError);
  EXPECT_EQ(load_image(d / "rgb.png", 1)(1, 1), 1.0);
  EXPECT_EQ(load_image(d / "rgb.png", 2)(1, 1), 0.0);
  EXPECT_THROW(load_image(d / "rgb.png", 3), IoError);
}

TEST(RoundTrip, MasksAreBitExact) {
  const fs::path d = scratch_dir();
  std::mt19937_64 rng(3);
  const BinaryMask m = testsupport::random_mask(rng, 37, 23, 0.4);
  for (const char* name : {"m.png", "m.pgm"}) {
    save_mask(d / name, m);
    EXPECT_EQ(load_mask(d / name), m);
    const RawRaster r = read_raster(d / name);
    for (auto s : r.samples) EXPECT_TRUE(s == 0 || s == 255);
  }
}

TEST(RoundTrip, EightBitImagesAreBitExact) {
  const fs::path d = scratch_dir();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(0, 255);
  ScalarField f(19, 11);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng) / 255.0;
  const GrayImage img(f);
  for (const char* name : {"i.png", "i.pgm"}) {
    save_image(d / name, img, 8);
    const GrayImage back = load_image(d / name);
    EXPECT_EQ(back.field(), img.field());
    save_image(d / "again.png", back, 8);
    save_image(d / "first.png", img, 8);
    EXPECT_EQ(read_bytes(d / "again.png"), read_bytes(d / "first.png"));
  }
}

TEST(RoundTrip, SixteenBitImages) {
  const fs::path d = scratch_dir();
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 65535);
  ScalarField f(8, 9);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng) / 65535.0;
  save_image(d / "w.png", GrayImage(f), 16);
  EXPECT_EQ(load_image(d / "w.png").field(), f);
}

TEST(Fields, SidecarAllowsInversion) {
  const fs::path d = scratch_dir();
  ScalarField f(5, 4);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = -3.0 + 0.37 * static_cast<double>(i);
  const FieldRange r = save_field(d / "f.png", f);
  EXPECT_EQ(r.min, -3.0);
  const ScalarField back = load_field(d / "f.png");
  const double q = (r.max - r.min) / 65535.0;
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], f[i], 0.5 * q + 1e-12);
  EXPECT_TRUE(fs::exists(d / "f.png.json"));
}

TEST(Contour, JsonRoundTripAndErrors) {
  const fs::path d = scratch_dir();
  const ContourPolygon p({{1, 2}, {30, 4}, {7, 19}});
  save_contour(d / "c.json", p);
  EXPECT_EQ(load_contour(d / "c.json").vertices(), p.vertices());
  EXPECT_EQ(nlohmann::json::parse(read_text(d / "c.json")).at("vertices").size(), 3u);
  write_bytes(d / "bad.json", "{\"points\": []}");
  EXPECT_THROW(load_contour(d / "bad.json"), IoError);
  write_bytes(d / "float.json", "{\"vertices\": [[0.5, 1], [2, 2], [3, 0]]}");
  EXPECT_THROW(load_contour(d / "float.json"), IoError);
  EXPECT_THROW(load_contour(d / "nope.json"), IoError);
}

TEST(AtomicWrite, NoTemporaryLeftBehind) {
  const fs::path d = scratch_dir();
  atomic_write_text(d / "t.txt", "hello");
  EXPECT_EQ(read_text(d / "t.txt"), "hello");
  EXPECT_FALSE(fs::exists(d / "t.txt.tmp"));
  EXPECT_THROW(atomic_write(d / "u.txt", [](const fs::path&) { throw IoError("boom"); }), IoError);
  EXPECT_FALSE(fs::exists(d / "u.txt"));
}
