#ifndef CSDSEG_EDT_HPP_
#define CSDSEG_EDT_HPP_

#include <cmath>
#include <limits>
#include <vector>

#include "csdseg/grid.hpp"

namespace csdseg {

namespace detail {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher); exact squared
// distance along one line. `f` holds the input costs, `d` the result.
inline void squared_edt_1d(const std::vector<double>& f, std::vector<double>& d,
                           std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everything so far.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace detail

/// Exact squared Euclidean distance (pixel units) from every pixel center to
/// the nearest true pixel of `seeds`.
inline ScalarField squared_distance_transform(const BinaryMask& seeds) {
  if (count_true(seeds) == 0) throw DegenerateRegion("distance transform: empty seed set");
  const int w = seeds.width();
  const int h = seeds.height();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  ScalarField out(w, h, kInf);

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = seeds(x, y) ? 0.0 : kInf;
    detail::squared_edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) out(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(w);
    d.resize(w);
    for (int x = 0; x < w; ++x) f[x] = out(x, y);
    detail::squared_edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out(x, y) = d[x];
  }
  return out;
}

/// Exact Euclidean distance to the nearest seed, in pixel units.
inline ScalarField distance_transform(const BinaryMask& seeds) {
  ScalarField out = squared_distance_transform(seeds);
  for (double& v : out.values()) v = std::sqrt(v);
  return out;
}

}  // namespace csdseg

#endif  // CSDSEG_EDT_HPP_
