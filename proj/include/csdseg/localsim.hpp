#ifndef CSDSEG_LOCALSIM_HPP_
#define CSDSEG_LOCALSIM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "csdseg/distmap.hpp"
#include "csdseg/grid.hpp"

namespace csdseg {

/// Tunable parameters of the local-similarity threshold model.
struct LsmParams {
  int window = 17;           // side of the square LSF window
  double mask_radius = 13;   // radius of the disk used for the local means
  double band_width = 7;     // half-width of the descent band, pixels
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  int max_iters = 50;
  double tol = 1e-4;

  /// Window, disk and band sizes only.
  void validate_geometry() const {
    if (window < 3 || window % 2 == 0) throw InvalidArgument("window must be odd and >= 3");
    if (!(mask_radius >= 1.0)) throw InvalidArgument("mask_radius must be >= 1");
    if (!(band_width >= 1.0)) throw InvalidArgument("band_width must be >= 1");
  }

  void validate() const {
    validate_geometry();
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || (lambda1 == 0.0 && lambda2 == 0.0)) {
      throw InvalidArgument("lambda1 and lambda2 must be >= 0 and not both zero");
    }
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  }
};

/// Disk-windowed local means on either side of the current region.
struct RegionStats {
  ScalarField lc1;  // inside
  ScalarField lc2;  // outside
};

namespace detail {

// Half-widths of the open disk d < r, one per row offset in [-rows, rows].
inline std::vector<int> disk_half_widths(double radius, int& rows) {
  rows = 0;
  while (static_cast<double>(rows + 1) * (rows + 1) < radius * radius) ++rows;
  std::vector<int> hw(2 * static_cast<std::size_t>(rows) + 1);
  for (int dy = -rows; dy <= rows; ++dy) {
    int k = 0;
    while (static_cast<double>(k + 1) * (k + 1) + static_cast<double>(dy) * dy <
           radius * radius) {
      ++k;
    }
    hw[static_cast<std::size_t>(dy + rows)] = k;
  }
  return hw;
}

struct WindowTap {
  int dx;
  int dy;
  double weight;  // 1 / distance
};

inline std::vector<WindowTap> lsf_window(int side) {
  std::vector<WindowTap> taps;
  const int r = side / 2;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      taps.push_back({dx, dy, 1.0 / std::sqrt(static_cast<double>(dx * dx + dy * dy))});
    }
  }
  return taps;
}

}  // namespace detail

/// lc1 / lc2: mean intensity over {y : |x - y| < r} restricted to the region
/// (lc1) or its complement (lc2). When that part of the disk is empty the
/// global mean of the same side is used.
inline RegionStats local_means(const GrayImage& image, const BinaryMask& region,
                               const LsmParams& params) {
  require_same_shape(image.field(), region, "local_means");
  if (is_degenerate(region)) {
    throw DegenerateRegion("local_means: region is empty or covers the whole image");
  }
  const int w = image.width();
  const int h = image.height();
  const std::size_t stride = static_cast<std::size_t>(w) + 1;

  // Row prefix sums of I*m, m, I*(1-m), (1-m).
  std::vector<double> in_sum(stride * h), in_cnt(stride * h), out_sum(stride * h),
      out_cnt(stride * h);
  double global_in = 0.0, global_out = 0.0, n_in = 0.0, n_out = 0.0;
  for (int y = 0; y < h; ++y) {
    const std::size_t row = stride * static_cast<std::size_t>(y);
    for (int x = 0; x < w; ++x) {
      const double v = image(x, y);
      const bool inside = region(x, y) != 0;
      in_sum[row + x + 1] = in_sum[row + x] + (inside ? v : 0.0);
      in_cnt[row + x + 1] = in_cnt[row + x] + (inside ? 1.0 : 0.0);
      out_sum[row + x + 1] = out_sum[row + x] + (inside ? 0.0 : v);
      out_cnt[row + x + 1] = out_cnt[row + x] + (inside ? 0.0 : 1.0);
      (inside ? global_in : global_out) += v;
      (inside ? n_in : n_out) += 1.0;
    }
  }
  global_in /= n_in;
  global_out /= n_out;

  int rows = 0;
  const std::vector<int> hw = detail::disk_half_widths(params.mask_radius, rows);

  RegionStats stats{ScalarField(w, h), ScalarField(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double si = 0.0, ci = 0.0, so = 0.0, co = 0.0;
      for (int dy = -rows; dy <= rows; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int k = hw[static_cast<std::size_t>(dy + rows)];
        const std::size_t row = stride * static_cast<std::size_t>(yy);
        const std::size_t lo = row + static_cast<std::size_t>(std::max(0, x - k));
        const std::size_t hi = row + static_cast<std::size_t>(std::min(w - 1, x + k)) + 1;
        si += in_sum[hi] - in_sum[lo];
        ci += in_cnt[hi] - in_cnt[lo];
        so += out_sum[hi] - out_sum[lo];
        co += out_cnt[hi] - out_cnt[lo];
      }
      // Counts are exact small integers; sums of at most ~pi r^2 values keep
      // the result inside the convex hull up to rounding, so clamp.
      stats.lc1(x, y) = ci > 0.0 ? std::clamp(si / ci, 0.0, 1.0) : global_in;
      stats.lc2(x, y) = co > 0.0 ? std::clamp(so / co, 0.0, 1.0) : global_out;
    }
  }
  return stats;
}

/// LSF(x, lc(x)) = sum over the window around x (clipped to the frame,
/// centre excluded) of (I(y) - lc(x))^2 / |x - y|.
inline ScalarField lsf_field(const GrayImage& image, const ScalarField& center_means,
                             const LsmParams& params) {
  require_same_shape(image.field(), center_means, "lsf_field");
  const auto taps = detail::lsf_window(params.window);
  const int w = image.width();
  const int h = image.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lc = center_means(x, y);
      double acc = 0.0;
      for (const auto& t : taps) {
        const int xx = x + t.dx;
        const int yy = y + t.dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        const double d = image(xx, yy) - lc;
        acc += d * d * t.weight;
      }
      out(x, y) = acc;
    }
  }
  return out;
}

/// Side-restricted LSF: like `lsf_field` but only window pixels y with
/// side(y) == `on_side` contribute. LSF1 uses the region itself, LSF2 its
/// complement.
inline ScalarField lsf_field(const GrayImage& image, const ScalarField& center_means,
                             const BinaryMask& side, bool on_side, const LsmParams& params) {
  require_same_shape(image.field(), center_means, "lsf_field");
  require_same_shape(image.field(), side, "lsf_field");
  const auto taps = detail::lsf_window(params.window);
  const int w = image.width();
  const int h = image.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lc = center_means(x, y);
      double acc = 0.0;
      for (const auto& t : taps) {
        const int xx = x + t.dx;
        const int yy = y + t.dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        if ((side(xx, yy) != 0) != on_side) continue;
        const double d = image(xx, yy) - lc;
        acc += d * d * t.weight;
      }
      out(x, y) = acc;
    }
  }
  return out;
}

/// Window moments that turn LSF into a quadratic in lc:
///   LSF(x, lc) = A(x) - 2 lc B(x) + lc^2 C(x)
/// with A = sum w I^2, B = sum w I, C = sum w over the clipped window. The
/// full-window moments depend only on the image; `split` restricts them to
/// one side of a region.
class LsfMoments {
 public:
  LsfMoments() = default;

  LsfMoments(const GrayImage& image, int window)
      : image_(&image),
        taps_(detail::lsf_window(window)),
        half_(window / 2),
        a_(image.width(), image.height()),
        b_(image.width(), image.height()),
        c_(image.width(), image.height()) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        accumulate(x, y, nullptr, a_(x, y), b_(x, y), c_(x, y));
      }
    }
  }

  double evaluate(std::size_t i, double lc) const { return quadratic(a_[i], b_[i], c_[i], lc); }

  ScalarField field(const ScalarField& center_means) const {
    require_same_shape(a_, center_means, "LsfMoments::field");
    ScalarField out(a_.width(), a_.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate(i, center_means[i]);
    return out;
  }

  /// Moments split by a region: inside-side sums for LSF1, complement-side
  /// sums for LSF2.
  class Split {
   public:
    double lsf1(std::size_t i, double lc) const { return quadratic(a1_[i], b1_[i], c1_[i], lc); }
    double lsf2(std::size_t i, double lc) const {
      return quadratic(full_->a_[i] - a1_[i], full_->b_[i] - b1_[i], full_->c_[i] - c1_[i], lc,
                       magnitude(full_->a_[i], full_->b_[i], full_->c_[i], lc));
    }

   private:
    friend class LsfMoments;
    const LsfMoments* full_ = nullptr;
    ScalarField a1_, b1_, c1_;
  };

  Split split(const BinaryMask& region) const {
    require_same_shape(a_, region, "LsfMoments::split");
    const int w = a_.width();
    const int h = a_.height();
    Split s;
    s.full_ = this;
    s.a1_ = ScalarField(w, h);
    s.b1_ = ScalarField(w, h);
    s.c1_ = ScalarField(w, h);

    // Integral image of the region to find windows that lie on one side.
    const std::size_t stride = static_cast<std::size_t>(w) + 1;
    std::vector<long> integral(stride * (static_cast<std::size_t>(h) + 1), 0);
    for (int y = 0; y < h; ++y) {
      long row = 0;
      for (int x = 0; x < w; ++x) {
        row += region(x, y) ? 1 : 0;
        integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
      }
    }
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - half_), y1 = std::min(h - 1, y + half_);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - half_), x1 = std::min(w - 1, x + half_);
        const long inside = integral[(y1 + 1) * stride + x1 + 1] - integral[y0 * stride + x1 + 1] -
                            integral[(y1 + 1) * stride + x0] + integral[y0 * stride + x0];
        // The window count includes the excluded centre pixel.
        const long total = static_cast<long>(y1 - y0 + 1) * (x1 - x0 + 1);
        const bool center_in = region(x, y) != 0;
        const long others_in = inside - (center_in ? 1 : 0);
        if (others_in == 0) continue;  // zeros already
        if (others_in == total - 1) {
          s.a1_(x, y) = a_(x, y);
          s.b1_(x, y) = b_(x, y);
          s.c1_(x, y) = c_(x, y);
          continue;
        }
        accumulate(x, y, &region, s.a1_(x, y), s.b1_(x, y), s.c1_(x, y));
      }
    }
    return s;
  }

 private:
  static double magnitude(double a, double b, double c, double lc) {
    return std::abs(a) + 2.0 * std::abs(lc * b) + lc * lc * std::abs(c);
  }

  // Values within rounding of zero are returned as exactly zero.
  static double quadratic(double a, double b, double c, double lc, double scale) {
    const double q = a - 2.0 * lc * b + lc * lc * c;
    return q <= 64.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : q;
  }
  static double quadratic(double a, double b, double c, double lc) {
    return quadratic(a, b, c, lc, magnitude(a, b, c, lc));
  }

  void accumulate(int x, int y, const BinaryMask* only, double& sa, double& sb,
                  double& sc) const {
    const int w = image_->width();
    const int h = image_->height();
    sa = sb = sc = 0.0;
    for (const auto& t : taps_) {
      const int xx = x + t.dx;
      const int yy = y + t.dy;
      if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
      if (only && !(*only)(xx, yy)) continue;
      const double v = (*image_)(xx, yy);
      sa += t.weight * v * v;
      sb += t.weight * v;
      sc += t.weight;
    }
  }

  const GrayImage* image_ = nullptr;
  std::vector<detail::WindowTap> taps_;
  int half_ = 0;
  ScalarField a_, b_, c_;
};

/// LSM energy of a region:
///   lambda1 * sum_{x in R} LSF1(x, lc1) + lambda2 * sum_{x not in R} LSF2(x, lc2)
/// where LSF1 sums over window pixels inside R and LSF2 over those outside.
inline double lsm_energy(const LsfMoments::Split& split, const BinaryMask& region,
                         const RegionStats& stats, const LsmParams& params) {
  double inside = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (region[i]) {
      inside += split.lsf1(i, stats.lc1[i]);
    } else {
      outside += split.lsf2(i, stats.lc2[i]);
    }
  }
  return params.lambda1 * inside + params.lambda2 * outside;
}

/// Energy of the region {D_I <= T}.
inline double lsm_energy(const GrayImage& image, const SignedDistanceMap& map, double threshold,
                         const LsmParams& params) {
  params.validate_geometry();
  require_same_shape(image.field(), map.field, "lsm_energy");
  const BinaryMask region = region_at(map, threshold);
  const RegionStats stats = local_means(image, region, params);
  const LsfMoments moments(image, params.window);
  return lsm_energy(moments.split(region), region, stats, params);
}

}  // namespace csdseg

#endif  // CSDSEG_LOCALSIM_HPP_
