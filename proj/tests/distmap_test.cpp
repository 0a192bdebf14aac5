#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "csdseg/distmap.hpp"
#include "csdseg/metrics.hpp"
#include "test_support.hpp"

using namespace csdseg;

using testsupport::normalize;
using testsupport::wavy_line_seeds;

TEST(EuclideanMap, AllSeedsGivesZeros) {
  const ScalarField d = euclidean_map(BinaryMask(4, 3, 1));
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(EuclideanMap, SingleCenterSeed) {
  BinaryMask s(3, 3, 0);
  s(1, 1) = 1;
  const ScalarField d = euclidean_map(s);
  EXPECT_DOUBLE_EQ(d(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d(2, 2), 1.0);
  EXPECT_NEAR(d(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(d(1, 1), 0.0);
}

TEST(EuclideanMap, EmptySeedsThrow) { EXPECT_THROW(euclidean_map(BinaryMask(5, 5, 0)), Error); }

TEST(EuclideanMap, RandomSeedsMatchBruteForce) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    BinaryMask s = testsupport::random_mask(rng, 32, 32, 0.02);
    s(t, 31 - t) = 1;
    const ScalarField exact = distance_transform(s);
    const ScalarField brute = testsupport::brute_distance(s);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(exact[i], brute[i], 1e-9);
  }
}

TEST(GeodesicMap, SeedsAreZeroAndMaxIsOne) {
  std::mt19937_64 rng(4);
  const GrayImage img = testsupport::smooth_image(rng, 40, 30);
  const BinaryMask s = wavy_line_seeds(rng, 40, 30);
  const ScalarField g = geodesic_map(img, s, {});
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) {
      EXPECT_EQ(g[i], 0.0);
    }
  EXPECT_DOUBLE_EQ(max_value(g), 1.0);
}

TEST(GeodesicMap, ConstantImageMatchesEuclidean) {
  std::mt19937_64 rng(8);
  const GrayImage img(ScalarField(64, 64, 0.4));
  const BinaryMask s = wavy_line_seeds(rng, 64, 64);
  const ScalarField g = geodesic_map(img, s, {});
  const ScalarField e = euclidean_map(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) continue;
    EXPECT_LE(std::abs(g[i] - e[i]) / e[i], 0.10) << "pixel " << i;
  }
}

TEST(GeodesicMap, MatchesEightConnectedShortestPaths) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 3; ++t) {
    const GrayImage img = testsupport::smooth_image(rng, 64, 64);
    const BinaryMask s = wavy_line_seeds(rng, 64, 64);
    const DistanceMapConfig cfg;
    const ScalarField g = geodesic_map(img, s, cfg);
    ScalarField ref = testsupport::dijkstra_geodesic(geodesic_speed(img, s, cfg), s);
    normalize(ref);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!s[i]) worst = std::max(worst, std::abs(g[i] - ref[i]) / ref[i]);
    EXPECT_LE(worst, 0.05);
  }
}

TEST(GeodesicMap, SpeedFollowsFormula) {
  const GrayImage img(3, 3, {0.2, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.2});
  BinaryMask s(3, 3, 0);
  s(0, 0) = 1;
  DistanceMapConfig cfg;
  cfg.geodesic_sigma = 0.2;
  const ScalarField f = geodesic_speed(img, s, cfg);
  EXPECT_NEAR(f(0, 0), 1.0 + 1e-6, 1e-15);
  EXPECT_NEAR(f(1, 1), 1.0 / (1.0 + 4.0) + 1e-6, 1e-15);
}

TEST(DistanceMapConfig, Validation) {
  DistanceMapConfig c;
  c.median_kernel = 4;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.geodesic_sigma = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.geodesic_epsilon = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_DOUBLE_EQ(DistanceMapConfig{}.resolved_sigma(GrayImage(ScalarField(3, 3, 0.5))), 1.0);
}

TEST(MedianFilter, MatchesSortedWindow) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(13, 9);
  for (double& v : f.values()) v = u(rng);
  for (int k : {1, 3, 5}) {
    const ScalarField m = median_filter(f, k);
    const int r = k / 2;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 13; ++x) {
        std::vector<double> win;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            win.push_back(f(std::clamp(x + dx, 0, 12), std::clamp(y + dy, 0, 8)));
        std::sort(win.begin(), win.end());
        EXPECT_EQ(m(x, y), win[win.size() / 2]);
      }
  }
}

TEST(BuildDistanceMap, SignsBoundsAndZeroSet) {
  std::mt19937_64 rng(6);
  const GrayImage img = testsupport::smooth_image(rng, 48, 40);
  const ContourPolygon poly({{0, 0}, {20, 0}, {26, 20}, {18, 39}, {0, 39}});
  const auto c = build_distance_map_components(img, poly, {});
  const BinaryMask inside = rasterize_contour(poly, 48, 40);
  EXPECT_EQ(c.initial_region, inside);
  EXPECT_EQ(c.seeds, mask_boundary(inside, true));
  bool any_zero = false;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    EXPECT_LE(std::abs(c.raw[i]), 1.0);
    EXPECT_LE(std::abs(c.map.field[i]), 1.0);
    if (c.seeds[i]) {
      EXPECT_EQ(c.raw[i], 0.0);
      EXPECT_FALSE(std::signbit(c.raw[i]));
      any_zero = true;
    } else if (inside[i]) {
      EXPECT_LT(c.raw[i], 0.0);
    } else {
      EXPECT_GT(c.raw[i], 0.0);
    }
  }
  EXPECT_TRUE(any_zero);
  EXPECT_DOUBLE_EQ(std::max(max_value(c.raw), -min_value(c.raw)), 1.0);
  EXPECT_TRUE(c.map.inside_negative);
  EXPECT_GE(dice(inside, region_at(c.map, 0.0)), 0.99);
  EXPECT_EQ(region_at(SignedDistanceMap{c.raw}, 0.0), inside);
}

TEST(BuildDistanceMap, ThresholdGrowsRegionMonotonically) {
  std::mt19937_64 rng(12);
  const GrayImage img = testsupport::smooth_image(rng, 32, 32);
  const auto map = build_distance_map(img, ContourPolygon({{0, 0}, {12, 0}, {14, 31}, {0, 31}}));
  std::size_t prev = 0;
  for (int k = -20; k <= 20; ++k) {
    const std::size_t n = count_true(region_at(map, 0.05 * k));
    EXPECT_GE(n, prev);
    prev = n;
  }
  EXPECT_EQ(prev, 32u * 32u);
}

TEST(BuildDistanceMap, ContourOnlyOnBorderHasNoSeeds) {
  const GrayImage img(ScalarField(8, 8, 0.5));
  EXPECT_THROW(build_distance_map(img, ContourPolygon({{0, 0}, {7, 0}, {7, 7}, {0, 7}})), Error);
}
