#ifndef CSDSEG_OPTIMIZER_HPP_
#define CSDSEG_OPTIMIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csdseg/contour.hpp"
#include "csdseg/distmap.hpp"
#include "csdseg/edt.hpp"
#include "csdseg/grid.hpp"
#include "csdseg/localsim.hpp"

namespace csdseg {

/// A band pixel together with its Euclidean distance to the current boundary.
struct BandPixel {
  Pixel pixel;
  double distance = 0.0;

  friend bool operator==(const BandPixel&, const BandPixel&) = default;
};

/// Pixels near the current threshold boundary, split by side. Lists are in
/// row-major order.
struct BandSample {
  std::vector<BandPixel> inside_pixels;
  std::vector<BandPixel> outside_pixels;

  std::size_t size() const { return inside_pixels.size() + outside_pixels.size(); }
  bool balanced() const {
    return !inside_pixels.empty() && inside_pixels.size() == outside_pixels.size();
  }

  friend bool operator==(const BandSample&, const BandSample&) = default;
};

struct DescentStep {
  double threshold = 0.0;
  double energy = 0.0;
  double delta = 0.0;  // dT/dt evaluated on the band
  double step = 0.0;   // adaptive step size
};

/// Iterates of the threshold descent, for diagnostics and CSV export.
struct DescentTrace {
  std::vector<DescentStep> iterations;
  double final_threshold = 0.0;
  bool converged = false;
};

/// Smallest admissible value of the step-size denominator's max term.
inline constexpr double kStepFloor = 1e-12;

/// Band N_T at threshold T: every pixel within `band_width` (exact Euclidean
/// distance) of the boundary of {D_I <= T}, split into the region side and
/// the complement side. The result is not balanced.
inline BandSample extract_band(const SignedDistanceMap& map, double threshold,
                               double band_width) {
  const BinaryMask region = region_at(map, threshold);
  if (is_degenerate(region)) {
    throw DegenerateRegion("extract_band: region at threshold is empty or full");
  }
  const BinaryMask boundary = mask_boundary(region, /*exclude_image_border=*/true);
  if (count_true(boundary) == 0) {
    throw DegenerateRegion("extract_band: boundary lies entirely on the image border");
  }
  const ScalarField dist = distance_transform(boundary);
  BandSample band;
  for (int y = 0; y < region.height(); ++y) {
    for (int x = 0; x < region.width(); ++x) {
      const double d = dist(x, y);
      if (d > band_width) continue;
      (region(x, y) ? band.inside_pixels : band.outside_pixels).push_back({{x, y}, d});
    }
  }
  return band;
}

/// Trims the larger side to the size of the smaller one, keeping the pixels
/// nearest to the boundary (ties broken by row-major order).
inline BandSample balance_band(const BandSample& sample) {
  if (sample.inside_pixels.empty() || sample.outside_pixels.empty()) {
    throw DegenerateRegion("balance_band: one side of the band is empty");
  }
  BandSample out = sample;
  auto& larger = out.inside_pixels.size() > out.outside_pixels.size() ? out.inside_pixels
                                                                      : out.outside_pixels;
  const std::size_t k = std::min(out.inside_pixels.size(), out.outside_pixels.size());
  if (larger.size() == k) return out;

  std::vector<std::size_t> order(larger.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Lists are row-major, so index order is the tie-break.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return larger[a].distance < larger[b].distance;
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  std::vector<BandPixel> kept;
  kept.reserve(k);
  for (std::size_t i : order) kept.push_back(larger[i]);
  larger = std::move(kept);
  return out;
}

/// LSF1 / LSF2 sampled on a band: inside pixels first, then outside.
struct BandLsf {
  std::vector<double> lsf1;
  std::vector<double> lsf2;
};

inline BandLsf band_lsf(const LsfMoments::Split& split, const BandSample& band,
                        const RegionStats& stats) {
  BandLsf out;
  out.lsf1.reserve(band.size());
  out.lsf2.reserve(band.size());
  auto push = [&](const std::vector<BandPixel>& side) {
    for (const auto& bp : side) {
      const std::size_t i = stats.lc1.index(bp.pixel.x, bp.pixel.y);
      out.lsf1.push_back(split.lsf1(i, stats.lc1[i]));
      out.lsf2.push_back(split.lsf2(i, stats.lc2[i]));
    }
  };
  push(band.inside_pixels);
  push(band.outside_pixels);
  return out;
}

/// Direct side-restricted LSF at one pixel: only window pixels with
/// region(y) == on_side contribute.
inline double lsf_at(const GrayImage& image, const BinaryMask& region, bool on_side, Pixel p,
                     double lc, int window) {
  const int r = window / 2;
  double acc = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int x = p.x + dx;
      const int y = p.y + dy;
      if (x < 0 || y < 0 || x >= image.width() || y >= image.height()) continue;
      if ((region(x, y) != 0) != on_side) continue;
      const double d = image(x, y) - lc;
      acc += d * d / std::sqrt(static_cast<double>(dx * dx + dy * dy));
    }
  }
  return acc;
}

inline BandLsf band_lsf(const GrayImage& image, const BinaryMask& region, const BandSample& band,
                        const RegionStats& stats, const LsmParams& params) {
  BandLsf out;
  auto push = [&](const std::vector<BandPixel>& side) {
    for (const auto& bp : side) {
      const Pixel p = bp.pixel;
      out.lsf1.push_back(lsf_at(image, region, true, p, stats.lc1(p.x, p.y), params.window));
      out.lsf2.push_back(lsf_at(image, region, false, p, stats.lc2(p.x, p.y), params.window));
    }
  };
  push(band.inside_pixels);
  push(band.outside_pixels);
  return out;
}

/// Threshold velocity over the band:
///   -(lambda1 * sum LSF1 - lambda2 * sum LSF2).
/// Positive when band pixels look more like the inside statistics, which
/// grows the region under the inside-negative map convention.
inline double threshold_velocity(std::span<const double> lsf1, std::span<const double> lsf2,
                                 const LsmParams& params) {
  double s1 = 0.0, s2 = 0.0;
  for (double v : lsf1) s1 += v;
  for (double v : lsf2) s2 += v;
  return -(params.lambda1 * s1 - params.lambda2 * s2);
}

/// 1 / (N * max |LSF1 - LSF2|), the max floored at kStepFloor.
inline double step_size(std::span<const double> lsf1, std::span<const double> lsf2) {
  if (lsf1.size() != lsf2.size() || lsf1.empty()) {
    throw InvalidArgument("step_size: LSF samples must be non-empty and equally sized");
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < lsf1.size(); ++i) peak = std::max(peak, std::abs(lsf1[i] - lsf2[i]));
  peak = std::max(peak, kStepFloor);
  return 1.0 / (static_cast<double>(lsf1.size()) * peak);
}

inline double step_size(const GrayImage& image, const BinaryMask& region, const BandSample& band,
                        const RegionStats& stats, const LsmParams& params) {
  const BandLsf lsf = band_lsf(image, region, band, stats, params);
  return step_size(lsf.lsf1, lsf.lsf2);
}

/// Holds the per-image state (window moments) reused by every iteration of
/// the threshold descent.
class ThresholdDescent {
 public:
  ThresholdDescent(const GrayImage& image, const SignedDistanceMap& map, LsmParams params)
      : image_(image), map_(map), params_(params), moments_(image, params.window) {
    params_.validate();
    require_same_shape(image.field(), map.field, "ThresholdDescent");
  }

  const LsfMoments& moments() const { return moments_; }

  struct Evaluation {
    BinaryMask region;
    RegionStats stats;
    BandSample band;
    BandLsf lsf;
    double energy = 0.0;
    double delta = 0.0;
    double step = 0.0;
  };

  /// Everything the update needs at threshold T. Throws DegenerateRegion
  /// when the region or its band collapses.
  Evaluation evaluate(double threshold) const {
    Evaluation e;
    e.region = region_at(map_, threshold);
    if (is_degenerate(e.region)) {
      throw DegenerateRegion("region at threshold is empty or full");
    }
    e.band = balance_band(extract_band(map_, threshold, params_.band_width));
    e.stats = local_means(image_, e.region, params_);
    const LsfMoments::Split split = moments_.split(e.region);
    e.energy = lsm_energy(split, e.region, e.stats, params_);
    e.lsf = band_lsf(split, e.band, e.stats);
    e.delta = threshold_velocity(e.lsf.lsf1, e.lsf.lsf2, params_);
    e.step = step_size(e.lsf.lsf1, e.lsf.lsf2);
    return e;
  }

  double energy(double threshold) const {
    const BinaryMask region = region_at(map_, threshold);
    const RegionStats stats = local_means(image_, region, params_);
    return lsm_energy(moments_.split(region), region, stats, params_);
  }

  /// Runs T_{n+1} = clamp(T_n + step * delta, -1, 1) from T_0 = 0.
  DescentTrace run() const {
    DescentTrace trace;
    double t = 0.0;
    {
      const BinaryMask initial = region_at(map_, t);
      if (is_degenerate(initial)) {
        throw DegenerateRegion("initial region (T = 0) is empty or full");
      }
    }
    trace.final_threshold = t;
    for (int n = 0; n < params_.max_iters; ++n) {
      Evaluation e;
      try {
        e = evaluate(t);
      } catch (const DegenerateRegion&) {
        if (n == 0) throw;
        break;
      }
      // A zero velocity means a flat band; skip the (possibly huge) step.
      const double update = e.delta == 0.0 ? 0.0 : e.step * e.delta;
      trace.iterations.push_back({t, e.energy, e.delta, e.step});
      const double next = std::clamp(t + update, -1.0, 1.0);
      if (std::abs(update) < params_.tol) {
        trace.final_threshold = next;
        trace.converged = true;
        break;
      }
      if (is_degenerate(region_at(map_, next))) break;
      t = next;
      trace.final_threshold = t;
    }
    return trace;
  }

 private:
  const GrayImage& image_;
  const SignedDistanceMap& map_;
  LsmParams params_;
  LsfMoments moments_;
};

/// dT/dt at threshold T on the balanced band.
inline double delta_T(const GrayImage& image, const SignedDistanceMap& map, double threshold,
                      const LsmParams& params) {
  return ThresholdDescent(image, map, params).evaluate(threshold).delta;
}

inline DescentTrace optimize_threshold(const GrayImage& image, const SignedDistanceMap& map,
                                       const LsmParams& params = {}) {
  return ThresholdDescent(image, map, params).run();
}

/// CSV with header `iteration,T,energy,deltaT,step`; values in %.17g.
inline void write_trace_csv(std::ostream& os, const DescentTrace& trace) {
  os << "iteration,T,energy,deltaT,step\n";
  char buf[160];
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& s = trace.iterations[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, s.threshold, s.energy,
                  s.delta, s.step);
    os << buf;
  }
}

}  // namespace csdseg

#endif  // CSDSEG_OPTIMIZER_HPP_
