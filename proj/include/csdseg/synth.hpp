#ifndef CSDSEG_SYNTH_HPP_
#define CSDSEG_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "csdseg/contour.hpp"
#include "csdseg/grid.hpp"

namespace csdseg {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so outputs do not depend on evaluation order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(mix(mix(seed_) ^ stream_) ^ counter);
  }

  /// Uniform in the open interval (0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  /// Standard normal via Box-Muller on counters 2k and 2k+1.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

struct SynthConfig {
  int width = 512;
  int height = 512;
  std::uint64_t seed = 1;
  double front_amplitude = 12.0;  // pixels
  double front_offset = 0.55;     // mean front position, fraction of width
  double inside_level = 0.55;
  double outside_level = 0.25;
  double shading_strength = 0.4;
  double noise_sigma = 0.08;
  int n_occlusions = 3;
  double occlusion_width = 8.0;
  double init_displacement = 40.0;  // pixels into the depolarized region

  void validate() const {
    if (width < 3 || height < 3) throw InvalidArgument("synth: image must be at least 3x3");
    if (!(0.0 <= outside_level && outside_level < inside_level && inside_level <= 1.0)) {
      throw InvalidArgument("synth: need 0 <= outside_level < inside_level <= 1");
    }
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("synth: noise_sigma must be >= 0");
    if (!(shading_strength >= 0.0 && shading_strength < 1.0)) {
      throw InvalidArgument("synth: shading_strength must be in [0, 1)");
    }
    if (!(front_amplitude >= 0.0)) throw InvalidArgument("synth: front_amplitude must be >= 0");
    if (!(front_offset > 0.0 && front_offset < 1.0)) {
      throw InvalidArgument("synth: front_offset must be in (0, 1)");
    }
    if (n_occlusions < 0) throw InvalidArgument("synth: n_occlusions must be >= 0");
    if (!(occlusion_width >= 0.0)) throw InvalidArgument("synth: occlusion_width must be >= 0");
    if (!(init_displacement >= 0.0)) {
      throw InvalidArgument("synth: init_displacement must be >= 0");
    }
  }
};

struct SynthSample {
  GrayImage image;
  BinaryMask truth;
  ContourPolygon suggested_init;
};

namespace synth_detail {

enum Stream : std::uint64_t { kFront = 1, kShading = 2, kNoise = 3, kOcclusion = 4 };

struct Wave {
  double amplitude;
  double cycles;
  double phase;
};

inline std::vector<Wave> front_waves(const SynthConfig& cfg) {
  const CounterRng rng(cfg.seed, kFront);
  const int n = 2 + static_cast<int>(rng.uniform(0) * 3.0);  // 2..4 components
  std::vector<Wave> waves;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t c = 1 + 3 * static_cast<std::uint64_t>(i);
    waves.push_back({rng.uniform(c, 0.5, 1.5), rng.uniform(c + 1, 0.5, 2.0),
                     rng.uniform(c + 2, 0.0, 2.0 * std::numbers::pi)});
    total += waves.back().amplitude;
  }
  for (auto& w : waves) w.amplitude *= cfg.front_amplitude / total;
  return waves;
}

inline double front_x(const SynthConfig& cfg, const std::vector<Wave>& waves, double y) {
  double x = cfg.front_offset * cfg.width;
  for (const auto& w : waves) {
    x += w.amplitude * std::sin(2.0 * std::numbers::pi * w.cycles * y / cfg.height + w.phase);
  }
  return x;
}

// Smooth multiplicative field in [1 - s, 1 + s].
inline ScalarField shading_field(const SynthConfig& cfg) {
  const CounterRng rng(cfg.seed, kShading);
  struct Term {
    double weight, fx, fy, phase;
  };
  std::array<Term, 3> terms{};
  double total = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::uint64_t c = 4 * k;
    terms[k] = {rng.uniform(c, 0.5, 1.0), rng.uniform(c + 1, -1.0, 1.0),
                rng.uniform(c + 2, -1.0, 1.0), rng.uniform(c + 3, 0.0, 2.0 * std::numbers::pi)};
    total += terms[k].weight;
  }
  ScalarField out(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      double g = 0.0;
      for (const auto& t : terms) {
        g += t.weight * std::cos(2.0 * std::numbers::pi *
                                     (t.fx * x / cfg.width + t.fy * y / cfg.height) +
                                 t.phase);
      }
      out(x, y) = 1.0 + cfg.shading_strength * g / total;
    }
  }
  return out;
}

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Curved dark streaks centred on the front; true where a streak covers a pixel.
inline BinaryMask occlusion_mask(const SynthConfig& cfg, const std::vector<Wave>& waves) {
  BinaryMask out(cfg.width, cfg.height, 0);
  const CounterRng rng(cfg.seed, kOcclusion);
  constexpr int kSamples = 65;
  const double half = 0.5 * cfg.occlusion_width;
  for (int k = 0; k < cfg.n_occlusions; ++k) {
    const std::uint64_t c = 8 * static_cast<std::uint64_t>(k);
    const double cy = rng.uniform(c, 0.1, 0.9) * cfg.height;
    const double cx = front_x(cfg, waves, cy);
    const double angle = rng.uniform(c + 1, -std::numbers::pi / 3.0, std::numbers::pi / 3.0);
    const double length = rng.uniform(c + 2, 0.3, 0.5) * cfg.width;
    const double bend = rng.uniform(c + 3, -0.15, 0.15) * length;
    const double dx = std::cos(angle), dy = std::sin(angle);
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < kSamples; ++i) {
      const double t = static_cast<double>(i) / (kSamples - 1) - 0.5;
      const double offset = bend * (1.0 - 4.0 * t * t);
      pts.push_back({cx + t * length * dx - offset * dy, cy + t * length * dy + offset * dx});
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : pts) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
    const int xa = std::max(0, static_cast<int>(std::floor(x0 - half)));
    const int xb = std::min(cfg.width - 1, static_cast<int>(std::ceil(x1 + half)));
    const int ya = std::max(0, static_cast<int>(std::floor(y0 - half)));
    const int yb = std::min(cfg.height - 1, static_cast<int>(std::ceil(y1 + half)));
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        if (out(x, y)) continue;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
          if (segment_distance(x, y, pts[i][0], pts[i][1], pts[i + 1][0], pts[i + 1][1]) <=
              half) {
            out(x, y) = 1;
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace synth_detail

inline constexpr double kOcclusionAttenuation = 0.2;

/// Ground-truth region: pixel centers strictly left of the front.
inline BinaryMask synth_truth(const SynthConfig& cfg) {
  const auto waves = synth_detail::front_waves(cfg);
  BinaryMask truth(cfg.width, cfg.height, 0);
  for (int y = 0; y < cfg.height; ++y) {
    const double f = synth_detail::front_x(cfg, waves, y);
    for (int x = 0; x < cfg.width; ++x) truth(x, y) = x < f ? 1 : 0;
  }
  return truth;
}

/// Initial contour: the front shifted `init_displacement` pixels into the
/// depolarized side, closed along the left image border.
inline ContourPolygon synth_initial_contour(const SynthConfig& cfg) {
  const auto waves = synth_detail::front_waves(cfg);
  constexpr int kRowStep = 4;
  std::vector<Pixel> v;
  auto add = [&](Pixel p) {
    if (v.empty() || !(v.back() == p)) v.push_back(p);
  };
  add({0, 0});
  for (int y = 0;; y = std::min(y + kRowStep, cfg.height - 1)) {
    const double x = synth_detail::front_x(cfg, waves, y) - cfg.init_displacement;
    add({std::clamp(static_cast<int>(std::lround(x)), 1, cfg.width - 1), y});
    if (y == cfg.height - 1) break;
  }
  add({0, cfg.height - 1});
  return ContourPolygon(std::move(v));
}

/// Deterministic CSD-like frame with exact ground truth.
inline SynthSample generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto waves = synth_detail::front_waves(cfg);
  BinaryMask truth = synth_truth(cfg);
  const ScalarField shading = synth_detail::shading_field(cfg);
  const BinaryMask occluded = synth_detail::occlusion_mask(cfg, waves);
  const CounterRng noise(cfg.seed, synth_detail::kNoise);

  ScalarField pixels(cfg.width, cfg.height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    double v = (truth[i] ? cfg.inside_level : cfg.outside_level) * shading[i];
    if (occluded[i]) v *= kOcclusionAttenuation;
    if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise.normal(i);
    pixels[i] = std::clamp(v, 0.0, 1.0);
  }
  return {GrayImage(std::move(pixels)), std::move(truth), synth_initial_contour(cfg)};
}

}  // namespace csdseg

#endif  // CSDSEG_SYNTH_HPP_
