#ifndef CSDSEG_DISTMAP_HPP_
#define CSDSEG_DISTMAP_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "csdseg/contour.hpp"
#include "csdseg/edt.hpp"
#include "csdseg/fast_marching.hpp"
#include "csdseg/grid.hpp"

namespace csdseg {

/// Parameters of the signed distance map.
struct DistanceMapConfig {
  int median_kernel = 5;
  /// Intensity scale of the geodesic speed; unset means the sample standard
  /// deviation of the image.
  std::optional<double> geodesic_sigma;
  double geodesic_epsilon = 1e-6;

  void validate() const {
    if (median_kernel < 1 || median_kernel % 2 == 0) {
      throw InvalidArgument("median_kernel must be odd and >= 1");
    }
    if (geodesic_sigma && !(*geodesic_sigma > 0.0)) {
      throw InvalidArgument("geodesic_sigma must be > 0");
    }
    if (!(geodesic_epsilon > 0.0)) throw InvalidArgument("geodesic_epsilon must be > 0");
  }

  /// Sigma actually used for `image`. A constant image has zero spread; any
  /// positive sigma gives the same (uniform) speed there, so 1 is used.
  double resolved_sigma(const GrayImage& image) const {
    if (geodesic_sigma) return *geodesic_sigma;
    const double s = image.stddev();
    return s > 0.0 ? s : 1.0;
  }
};

/// Pixels inside the initial contour are negative, so thresholding at T = 0
/// reproduces the initial region and larger T grows it outward.
inline constexpr bool kInsideNegative = true;

/// Normalized signed map D_I with values in [-1, 1].
struct SignedDistanceMap {
  ScalarField field;
  bool inside_negative = kInsideNegative;

  int width() const { return field.width(); }
  int height() const { return field.height(); }
};

/// Intermediate products of the map construction, kept for debug dumps.
struct DistanceMapComponents {
  BinaryMask initial_region;
  BinaryMask seeds;
  ScalarField euclidean;  // d0, max 1
  ScalarField geodesic;   // g0, max 1
  ScalarField raw;        // signed, before median filtering
  SignedDistanceMap map;  // median filtered
};

namespace detail {

inline void normalize_by_max(ScalarField& field) {
  const double m = max_value(field);
  if (m > 0.0) {
    for (double& v : field.values()) v /= m;
  } else {
    for (double& v : field.values()) v = 0.0;
  }
}

}  // namespace detail

/// Euclidean distance to the nearest seed divided by its maximum over the frame.
inline ScalarField euclidean_map(const BinaryMask& seeds) {
  ScalarField d = distance_transform(seeds);
  detail::normalize_by_max(d);
  return d;
}

/// Mean intensity over the seed pixels.
inline double seed_mean(const GrayImage& image, const BinaryMask& seeds) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i]) {
      s += image[i];
      ++n;
    }
  }
  if (n == 0) throw DegenerateRegion("empty seed set");
  return s / static_cast<double>(n);
}

/// Marching speed F = 1 / (1 + ((I - m) / sigma)^2) + epsilon, where m is the
/// seed mean intensity.
inline ScalarField geodesic_speed(const GrayImage& image, const BinaryMask& seeds,
                                  const DistanceMapConfig& cfg) {
  const double m = seed_mean(image, seeds);
  const double sigma = cfg.resolved_sigma(image);
  ScalarField speed(image.width(), image.height());
  for (std::size_t i = 0; i < speed.size(); ++i) {
    const double z = (image[i] - m) / sigma;
    speed[i] = 1.0 / (1.0 + z * z) + cfg.geodesic_epsilon;
  }
  return speed;
}

/// Fast-marching arrival time from the seeds under `geodesic_speed`,
/// normalized to max 1.
inline ScalarField geodesic_map(const GrayImage& image, const BinaryMask& seeds,
                                const DistanceMapConfig& cfg) {
  cfg.validate();
  require_same_shape(image.field(), seeds, "geodesic_map");
  if (count_true(seeds) == 0) throw DegenerateRegion("geodesic_map: empty seed set");
  ScalarField slowness = geodesic_speed(image, seeds, cfg);
  for (double& v : slowness.values()) v = 1.0 / v;
  ScalarField g = fast_marching(slowness, seeds);
  detail::normalize_by_max(g);
  return g;
}

/// Square-window median filter with replicated borders.
inline ScalarField median_filter(const ScalarField& in, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw InvalidArgument("median kernel must be odd");
  if (kernel == 1) return in;
  const int r = kernel / 2;
  const int w = in.width();
  const int h = in.height();
  ScalarField out(w, h);
  std::vector<double> window(static_cast<std::size_t>(kernel) * kernel);
  const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          window[k++] = in(std::clamp(x + dx, 0, w - 1), yy);
        }
      }
      std::nth_element(window.begin(), mid, window.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

/// Builds every stage of D_I: seeds from the initial contour's boundary
/// (image-border pixels excluded), d0 and g0, their signed normalized
/// product, and the median-filtered result.
inline DistanceMapComponents build_distance_map_components(const GrayImage& image,
                                                           const ContourPolygon& initial,
                                                           const DistanceMapConfig& cfg) {
  cfg.validate();
  DistanceMapComponents c;
  c.initial_region = rasterize_contour(initial, image.width(), image.height());
  c.seeds = mask_boundary(c.initial_region, /*exclude_image_border=*/true);
  if (count_true(c.seeds) == 0) {
    throw DegenerateRegion("initial contour has no boundary pixels away from the image border");
  }
  c.euclidean = euclidean_map(c.seeds);
  c.geodesic = geodesic_map(image, c.seeds, cfg);

  c.raw = ScalarField(image.width(), image.height());
  double peak = 0.0;
  for (std::size_t i = 0; i < c.raw.size(); ++i) {
    c.raw[i] = c.euclidean[i] * c.geodesic[i];
    peak = std::max(peak, c.raw[i]);
  }
  for (std::size_t i = 0; i < c.raw.size(); ++i) {
    const double magnitude = peak > 0.0 ? c.raw[i] / peak : 0.0;
    c.raw[i] = (c.initial_region[i] && magnitude > 0.0) ? -magnitude : magnitude;
  }
  c.map.field = median_filter(c.raw, cfg.median_kernel);
  return c;
}

inline SignedDistanceMap build_distance_map(const GrayImage& image,
                                            const ContourPolygon& initial,
                                            const DistanceMapConfig& cfg = {}) {
  return std::move(build_distance_map_components(image, initial, cfg).map);
}

/// Pseudo-level-set region {x : D_I(x) <= T}.
inline BinaryMask region_at(const SignedDistanceMap& map, double threshold) {
  BinaryMask out(map.width(), map.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = map.field[i] <= threshold ? 1 : 0;
  return out;
}

}  // namespace csdseg

#endif  // CSDSEG_DISTMAP_HPP_
