#ifndef CSDSEG_CONTOUR_HPP_
#define CSDSEG_CONTOUR_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "csdseg/grid.hpp"

namespace csdseg {

/// Closed polygon with integer vertices, used as the initial contour.
class ContourPolygon {
 public:
  ContourPolygon() = default;

  explicit ContourPolygon(std::vector<Pixel> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
      throw InvalidArgument("contour polygon needs at least 3 vertices");
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (vertices_[i] == vertices_[(i + 1) % vertices_.size()]) {
        throw InvalidArgument("contour polygon has identical consecutive vertices at index " +
                              std::to_string(i));
      }
    }
  }

  const std::vector<Pixel>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  /// Twice the signed shoelace area.
  long long doubled_area() const {
    long long acc = 0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Pixel& a = vertices_[i];
      const Pixel& b = vertices_[(i + 1) % vertices_.size()];
      acc += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
    }
    return acc;
  }

  bool fits(int width, int height) const {
    return std::all_of(vertices_.begin(), vertices_.end(), [&](const Pixel& p) {
      return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
    });
  }

  friend bool operator==(const ContourPolygon&, const ContourPolygon&) = default;

 private:
  std::vector<Pixel> vertices_;
};

/// Fills the polygon with the even-odd rule on pixel centers. Centers lying
/// exactly on an edge count as inside.
inline BinaryMask rasterize_contour(const ContourPolygon& poly, int width, int height) {
  if (poly.size() < 3) throw InvalidArgument("contour polygon needs at least 3 vertices");
  if (!poly.fits(width, height)) {
    throw InvalidArgument("contour polygon has vertices outside the " + std::to_string(width) +
                          "x" + std::to_string(height) + " image");
  }
  if (poly.doubled_area() == 0) throw InvalidArgument("contour polygon has zero area");

  BinaryMask mask(width, height, 0);
  const auto& v = poly.vertices();
  const std::size_t n = v.size();

  // Lattice points lying on an edge: integer endpoints, so they sit at
  // multiples of (dx, dy) / gcd.
  for (std::size_t i = 0; i < n; ++i) {
    const Pixel a = v[i];
    const Pixel b = v[(i + 1) % n];
    const int dx = b.x - a.x;
    const int dy = b.y - a.y;
    const int g = std::gcd(std::abs(dx), std::abs(dy));
    for (int k = 0; k <= g; ++k) mask(a.x + k * dx / g, a.y + k * dy / g) = 1;
  }

  // Interior by scanline: an edge crosses row y when y lies in its half-open
  // vertical span. Off-boundary centers never coincide with a crossing.
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Pixel a = v[i];
      const Pixel b = v[(i + 1) % n];
      if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
        const double t = static_cast<double>(y - a.y) / static_cast<double>(b.y - a.y);
        xs.push_back(a.x + t * (b.x - a.x));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int lo = std::max(0, static_cast<int>(std::floor(xs[k])) + 1);
      const int hi = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
      for (int x = lo; x <= hi; ++x) mask(x, y) = 1;
    }
  }
  return mask;
}

inline bool on_image_border(int x, int y, int width, int height) {
  return x == 0 || y == 0 || x == width - 1 || y == height - 1;
}

/// Pixels of `mask` that have at least one 4-neighbour outside the mask.
/// Neighbours beyond the frame do not count. With `exclude_image_border`
/// the outermost rows and columns are dropped from the result.
inline BinaryMask mask_boundary(const BinaryMask& mask, bool exclude_image_border) {
  if (is_degenerate(mask)) {
    throw DegenerateRegion("mask is empty or full; it has no boundary");
  }
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      if (exclude_image_border && on_image_border(x, y, w, h)) continue;
      const bool edge = (x > 0 && !mask(x - 1, y)) || (x + 1 < w && !mask(x + 1, y)) ||
                        (y > 0 && !mask(x, y - 1)) || (y + 1 < h && !mask(x, y + 1));
      if (edge) out(x, y) = 1;
    }
  }
  return out;
}

inline std::vector<Pixel> mask_pixels(const BinaryMask& mask) {
  std::vector<Pixel> out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) out.push_back({x, y});
    }
  }
  return out;
}

}  // namespace csdseg

#endif  // CSDSEG_CONTOUR_HPP_
