#ifndef CSDSEG_METRICS_HPP_
#define CSDSEG_METRICS_HPP_

#include <cmath>
#include <cstddef>

#include "csdseg/contour.hpp"
#include "csdseg/edt.hpp"
#include "csdseg/grid.hpp"

namespace csdseg {

struct EvalReport {
  double dice = 0.0;
  double rmse = 0.0;
  std::size_t n_boundary_points = 0;
};

/// 2 |R1 n R2| / (|R1| + |R2|) with pixel-count areas.
inline double dice(const BinaryMask& truth, const BinaryMask& seg) {
  require_same_shape(truth, seg, "dice");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] != 0;
    const bool s = seg[i] != 0;
    a += t;
    b += s;
    both += t && s;
  }
  if (a + b == 0) throw DegenerateRegion("dice: both masks are empty");
  return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

namespace detail {

struct BoundaryErrors {
  double sum_sq = 0.0;
  std::size_t count = 0;
};

// Squared nearest distances from boundary(from) to boundary(to).
inline BoundaryErrors directed_boundary_errors(const BinaryMask& from, const BinaryMask& to) {
  const BinaryMask bf = mask_boundary(from, true);
  const BinaryMask bt = mask_boundary(to, true);
  if (count_true(bf) == 0 || count_true(bt) == 0) {
    throw DegenerateRegion("boundary_rmse: boundary is empty after border exclusion");
  }
  const ScalarField d2 = squared_distance_transform(bt);
  BoundaryErrors e;
  for (std::size_t i = 0; i < bf.size(); ++i) {
    if (!bf[i]) continue;
    e.sum_sq += d2[i];
    ++e.count;
  }
  return e;
}

}  // namespace detail

/// Root-mean-square distance from each boundary pixel of `seg` to the nearest
/// boundary pixel of `truth` (4-adjacency boundaries, image-border pixels
/// excluded). Directed: swapping the arguments generally changes the value.
/// With `symmetric` the errors of both directions are pooled.
inline double boundary_rmse(const BinaryMask& truth, const BinaryMask& seg,
                            bool symmetric = false) {
  require_same_shape(truth, seg, "boundary_rmse");
  auto e = detail::directed_boundary_errors(seg, truth);
  if (symmetric) {
    const auto back = detail::directed_boundary_errors(truth, seg);
    e.sum_sq += back.sum_sq;
    e.count += back.count;
  }
  return std::sqrt(e.sum_sq / static_cast<double>(e.count));
}

inline EvalReport evaluate(const BinaryMask& truth, const BinaryMask& seg) {
  EvalReport r;
  r.dice = dice(truth, seg);
  const auto e = detail::directed_boundary_errors(seg, truth);
  r.rmse = std::sqrt(e.sum_sq / static_cast<double>(e.count));
  r.n_boundary_points = e.count;
  return r;
}

}  // namespace csdseg

#endif  // CSDSEG_METRICS_HPP_
