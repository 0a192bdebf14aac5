#ifndef CSDSEG_FAST_MARCHING_HPP_
#define CSDSEG_FAST_MARCHING_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "csdseg/grid.hpp"

namespace csdseg {

/// First-order fast marching solution of |grad u| = cost on the pixel grid,
/// with u = 0 on the seeds and 4-neighbour upwind differences. `cost` is the
/// slowness 1/F and must be positive and finite everywhere.
inline ScalarField fast_marching(const ScalarField& cost, const BinaryMask& seeds) {
  require_same_shape(cost, seeds, "fast_marching");
  if (count_true(seeds) == 0) throw DegenerateRegion("fast marching: empty seed set");
  for (double c : cost.values()) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw InvalidArgument("fast marching: slowness must be positive and finite");
    }
  }

  const int w = cost.width();
  const int h = cost.height();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  enum : std::uint8_t { kFar, kTrial, kKnown };

  ScalarField u(w, h, kInf);
  std::vector<std::uint8_t> state(u.size(), kFar);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i]) {
      u[i] = 0.0;
      state[i] = kKnown;
    }
  }

  auto known = [&](int x, int y) -> double {
    if (!u.contains(x, y)) return kInf;
    const std::size_t i = u.index(x, y);
    return state[i] == kKnown ? u[i] : kInf;
  };

  auto solve = [&](int x, int y) {
    const double a = std::min(known(x - 1, y), known(x + 1, y));
    const double b = std::min(known(x, y - 1), known(x, y + 1));
    const double s = cost(x, y);
    if (a == kInf) return b + s;
    if (b == kInf) return a + s;
    if (std::abs(a - b) >= s) return std::min(a, b) + s;
    return 0.5 * (a + b + std::sqrt(2.0 * s * s - (a - b) * (a - b)));
  };

  auto relax_neighbours = [&](int x, int y) {
    constexpr int dx[4] = {-1, 1, 0, 0};
    constexpr int dy[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (!u.contains(nx, ny)) continue;
      const std::size_t j = u.index(nx, ny);
      if (state[j] == kKnown) continue;
      const double candidate = solve(nx, ny);
      if (candidate < u[j]) {
        u[j] = candidate;
        state[j] = kTrial;
        heap.emplace(candidate, j);
      }
    }
  };

  // First layer: straight-line travel time from the adjacent seeds.
  std::vector<std::size_t> layer;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (seeds(x, y)) continue;
      double best = kInf;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!seeds.contains(x + dx, y + dy) || !seeds(x + dx, y + dy)) continue;
          const double step = std::sqrt(static_cast<double>(dx * dx + dy * dy));
          best = std::min(best, step * 0.5 * (cost(x, y) + cost(x + dx, y + dy)));
        }
      }
      if (best < kInf) {
        u(x, y) = best;
        layer.push_back(u.index(x, y));
      }
    }
  }
  for (std::size_t i : layer) state[i] = kKnown;
  for (std::size_t i : layer) {
    relax_neighbours(static_cast<int>(i % static_cast<std::size_t>(w)),
                     static_cast<int>(i / static_cast<std::size_t>(w)));
  }

  while (!heap.empty()) {
    const auto [value, i] = heap.top();
    heap.pop();
    if (state[i] == kKnown || value > u[i]) continue;  // stale entry
    state[i] = kKnown;
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    relax_neighbours(x, y);
  }
  return u;
}

}  // namespace csdseg

#endif  // CSDSEG_FAST_MARCHING_HPP_
