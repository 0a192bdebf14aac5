#include <gtest/gtest.h>

#include <random>

#include "csdseg/contour.hpp"
#include "csdseg/grid.hpp"
#include "test_support.hpp"

using namespace csdseg;

TEST(GrayImage, RejectsTooSmallAndOutOfRange) {
  EXPECT_THROW(GrayImage(ScalarField(2, 5, 0.5)), InvalidArgument);
  EXPECT_THROW(GrayImage(ScalarField(3, 3, 1.5)), InvalidArgument);
  ScalarField nan(3, 3, 0.0);
  nan[4] = std::nan("");
  EXPECT_THROW(GrayImage{nan}, InvalidArgument);
  EXPECT_NO_THROW(GrayImage(ScalarField(3, 3, 1.0)));
}

TEST(GrayImage, MeanAndSampleStddev) {
  const GrayImage img(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(img.mean(), 1.0 / 9.0);
  EXPECT_NEAR(img.stddev(), std::sqrt((8.0 / 81.0 + 64.0 / 81.0) / 8.0), 1e-15);
}

TEST(ContourPolygon, Invariants) {
  EXPECT_THROW(ContourPolygon({{0, 0}, {1, 1}}), InvalidArgument);
  EXPECT_THROW(ContourPolygon({{0, 0}, {0, 0}, {1, 1}}), InvalidArgument);
  EXPECT_THROW(ContourPolygon({{0, 0}, {1, 1}, {2, 0}, {0, 0}}), InvalidArgument);
  EXPECT_NO_THROW(ContourPolygon({{0, 0}, {1, 1}, {2, 0}}));
}

TEST(Rasterize, RectangleInclusiveBox) {
  const ContourPolygon rect({{2, 2}, {6, 2}, {6, 6}, {2, 6}});
  const BinaryMask m = rasterize_contour(rect, 10, 10);
  EXPECT_EQ(count_true(m), 25u);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x)
      EXPECT_EQ(m(x, y) != 0, x >= 2 && x <= 6 && y >= 2 && y <= 6);
}

TEST(Rasterize, TriangleMatchesPointInPolygon) {
  const ContourPolygon tri({{0, 0}, {4, 0}, {0, 4}});
  const BinaryMask m = rasterize_contour(tri, 8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      EXPECT_EQ(m(x, y) != 0, testsupport::point_in_polygon(tri, x, y)) << x << "," << y;
}

TEST(Rasterize, RandomPolygonsMatchPointInPolygon) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(0, 23);
  int checked = 0;
  while (checked < 40) {
    std::vector<Pixel> v;
    for (int k = 0; k < 6; ++k) v.push_back({coord(rng), coord(rng)});
    std::optional<ContourPolygon> poly;
    try {
      poly.emplace(v);
    } catch (const InvalidArgument&) {
      continue;
    }
    if (poly->doubled_area() == 0) continue;
    const BinaryMask m = rasterize_contour(*poly, 24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        ASSERT_EQ(m(x, y) != 0, testsupport::point_in_polygon(*poly, x, y))
            << "polygon " << checked << " pixel " << x << "," << y;
    ++checked;
  }
}

TEST(Rasterize, FullFrame) {
  const ContourPolygon all({{0, 0}, {9, 0}, {9, 6}, {0, 6}});
  EXPECT_EQ(count_true(rasterize_contour(all, 10, 7)), 70u);
}

TEST(Rasterize, CyclicRotationInvariant) {
  std::vector<Pixel> v{{3, 1}, {17, 4}, {12, 9}, {19, 18}, {4, 15}, {8, 8}};
  const BinaryMask ref = rasterize_contour(ContourPolygon(v), 20, 20);
  for (std::size_t k = 1; k < v.size(); ++k) {
    std::rotate(v.begin(), v.begin() + 1, v.end());
    EXPECT_EQ(rasterize_contour(ContourPolygon(v), 20, 20), ref);
  }
}

TEST(Rasterize, Errors) {
  EXPECT_THROW(rasterize_contour(ContourPolygon({{0, 0}, {2, 2}, {4, 4}}), 8, 8), InvalidArgument);
  EXPECT_THROW(rasterize_contour(ContourPolygon({{0, 0}, {9, 0}, {0, 9}}), 8, 8), InvalidArgument);
}

TEST(MaskBoundary, CenteredBlock) {
  BinaryMask m(5, 5, 0);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) m(x, y) = 1;
  const BinaryMask b = mask_boundary(m, true);
  EXPECT_EQ(count_true(b), 8u);
  EXPECT_FALSE(b(2, 2));
}

TEST(MaskBoundary, ExcludesImageEdgeRows) {
  BinaryMask m(6, 6, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 3; ++x) m(x, y) = 1;
  const BinaryMask with = mask_boundary(m, false);
  const BinaryMask without = mask_boundary(m, true);
  EXPECT_TRUE(with(2, 0));
  EXPECT_FALSE(without(2, 0));
  EXPECT_FALSE(without(2, 5));
  EXPECT_TRUE(without(2, 3));
  for (int y = 0; y < 6; ++y) EXPECT_FALSE(without(0, y));
}

TEST(MaskBoundary, RandomMatchesBruteForceAndIsSubset) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const BinaryMask m = testsupport::random_mask(rng, 32, 32, 0.5);
    for (bool flag : {false, true}) {
      const BinaryMask b = mask_boundary(m, flag);
      EXPECT_EQ(b, testsupport::brute_boundary(m, flag));
      for (std::size_t i = 0; i < m.size(); ++i)
        if (b[i]) {
          EXPECT_TRUE(m[i]);
        }
    }
  }
}

TEST(MaskBoundary, EmptyOrFullThrows) {
  EXPECT_THROW(mask_boundary(BinaryMask(4, 4, 0), true), DegenerateRegion);
  EXPECT_THROW(mask_boundary(BinaryMask(4, 4, 1), false), DegenerateRegion);
}
