#ifndef CSDSEG_CHAN_VESE_HPP_
#define CSDSEG_CHAN_VESE_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "csdseg/contour.hpp"
#include "csdseg/edt.hpp"
#include "csdseg/grid.hpp"

namespace csdseg {

/// Two-phase piecewise-constant active contour (Chan-Vese), used as the
/// comparison baseline.
struct ChanVeseParams {
  double mu_smooth = 0.2;
  double lambda_in = 1.0;
  double lambda_out = 1.0;
  int iters = 1000;
  double dt = 0.5;
  double epsilon_h = 1.0;

  void validate() const {
    if (!(mu_smooth > 0.0) || !(lambda_in > 0.0) || !(lambda_out > 0.0) || !(dt > 0.0) ||
        !(epsilon_h > 0.0)) {
      throw InvalidArgument("Chan-Vese parameters must be positive");
    }
    if (iters < 1) throw InvalidArgument("Chan-Vese iters must be >= 1");
  }
};

struct ChanVeseResult {
  BinaryMask mask;
  double c1 = 0.0;
  double c2 = 0.0;
  int iterations = 0;
  /// No contrast between the phases, or the final region is empty or full.
  bool degenerate = false;
  /// Energy before the first update and after each iteration; filled only
  /// when requested.
  std::vector<double> energies;
};

namespace cv_detail {

inline double heaviside(double phi, double eps) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(phi / eps));
}

inline double dirac(double phi, double eps) {
  return eps / (std::numbers::pi * (eps * eps + phi * phi));
}

inline void region_means(const GrayImage& image, const ScalarField& phi, double eps, double& c1,
                         double& c2) {
  double s1 = 0.0, n1 = 0.0, s2 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double hv = heaviside(phi[i], eps);
    s1 += hv * image[i];
    n1 += hv;
    s2 += (1.0 - hv) * image[i];
    n2 += 1.0 - hv;
  }
  c1 = n1 > 0.0 ? s1 / n1 : 0.0;
  c2 = n2 > 0.0 ? s2 / n2 : 0.0;
}

inline double energy(const GrayImage& image, const ScalarField& phi, double c1, double c2,
                     const ChanVeseParams& p) {
  const int w = phi.width();
  const int h = phi.height();
  double length = 0.0, data = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = phi(x, y);
      const double gx = 0.5 * (phi(std::min(x + 1, w - 1), y) - phi(std::max(x - 1, 0), y));
      const double gy = 0.5 * (phi(x, std::min(y + 1, h - 1)) - phi(x, std::max(y - 1, 0)));
      length += dirac(v, p.epsilon_h) * std::sqrt(gx * gx + gy * gy);
      const double hv = heaviside(v, p.epsilon_h);
      const double i = image(x, y);
      data += p.lambda_in * (i - c1) * (i - c1) * hv +
              p.lambda_out * (i - c2) * (i - c2) * (1.0 - hv);
    }
  }
  return p.mu_smooth * length + data;
}

}  // namespace cv_detail

/// Evolves phi from the clamped signed distance to the initial contour with the
/// semi-implicit Gauss-Seidel scheme, recomputing c1 and c2 each iteration.
/// Intensities are rescaled to [0, 1] first. Replicated (Neumann) borders.
/// Energies are reported in rescaled units, c1 and c2 in input units.
inline ChanVeseResult chan_vese_run(const GrayImage& input, const ContourPolygon& initial,
                                    const ChanVeseParams& params, bool record_energy = false) {
  params.validate();
  const double lo = min_value(input.field());
  const double range = max_value(input.field()) - lo;
  const double scale = range > 0.0 ? range : 1.0;
  ScalarField rescaled(input.width(), input.height());
  for (std::size_t i = 0; i < rescaled.size(); ++i) rescaled[i] = (input[i] - lo) / scale;
  const GrayImage image(std::move(rescaled));
  const BinaryMask init = rasterize_contour(initial, image.width(), image.height());
  if (is_degenerate(init)) throw DegenerateRegion("Chan-Vese: initial region is empty or full");

  const int w = image.width();
  const int h = image.height();
  // Signed distance to the initial boundary, positive inside, clamped.
  constexpr double kPhiClamp = 2.0;
  const ScalarField to_inside = distance_transform(init);
  BinaryMask outside(w, h, 0);
  for (std::size_t i = 0; i < init.size(); ++i) outside[i] = init[i] ? 0 : 1;
  const ScalarField to_outside = distance_transform(outside);
  ScalarField phi(w, h);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    phi[i] = std::clamp(init[i] ? to_outside[i] - 0.5 : 0.5 - to_inside[i], -kPhiClamp,
                        kPhiClamp);
  }

  constexpr double kEta = 1e-8;
  const double mu = params.mu_smooth;
  ChanVeseResult r;
  cv_detail::region_means(image, phi, params.epsilon_h, r.c1, r.c2);
  if (record_energy) r.energies.push_back(cv_detail::energy(image, phi, r.c1, r.c2, params));

  for (int it = 0; it < params.iters; ++it) {
    for (int y = 0; y < h; ++y) {
      const int ym = std::max(y - 1, 0);
      const int yp = std::min(y + 1, h - 1);
      for (int x = 0; x < w; ++x) {
        const int xm = std::max(x - 1, 0);
        const int xp = std::min(x + 1, w - 1);
        const double p0 = phi(x, y);
        const double pxp = phi(xp, y), pxm = phi(xm, y);
        const double pyp = phi(x, yp), pym = phi(x, ym);
        const double c_xp = 1.0 / std::sqrt(kEta + (pxp - p0) * (pxp - p0) +
                                            0.25 * (pyp - pym) * (pyp - pym));
        const double c_xm = 1.0 / std::sqrt(
                                      kEta + (p0 - pxm) * (p0 - pxm) +
                                      0.25 * (phi(xm, yp) - phi(xm, ym)) * (phi(xm, yp) - phi(xm, ym)));
        const double c_yp = 1.0 / std::sqrt(kEta + 0.25 * (pxp - pxm) * (pxp - pxm) +
                                            (pyp - p0) * (pyp - p0));
        const double c_ym = 1.0 / std::sqrt(
                                      kEta +
                                      0.25 * (phi(xp, ym) - phi(xm, ym)) * (phi(xp, ym) - phi(xm, ym)) +
                                      (p0 - pym) * (p0 - pym));
        const double i = image(x, y);
        const double d = params.dt * cv_detail::dirac(p0, params.epsilon_h);
        const double force = -params.lambda_in * (i - r.c1) * (i - r.c1) +
                             params.lambda_out * (i - r.c2) * (i - r.c2);
        const double num =
            p0 + d * (mu * (c_xp * pxp + c_xm * pxm + c_yp * pyp + c_ym * pym) + force);
        phi(x, y) = num / (1.0 + d * mu * (c_xp + c_xm + c_yp + c_ym));
      }
    }
    cv_detail::region_means(image, phi, params.epsilon_h, r.c1, r.c2);
    r.iterations = it + 1;
    if (record_energy) r.energies.push_back(cv_detail::energy(image, phi, r.c1, r.c2, params));
  }

  r.mask = BinaryMask(w, h, 0);
  for (std::size_t i = 0; i < phi.size(); ++i) r.mask[i] = phi[i] > 0.0 ? 1 : 0;
  r.degenerate = std::abs(r.c1 - r.c2) < 1e-9 || is_degenerate(r.mask);
  r.c1 = lo + scale * r.c1;
  r.c2 = lo + scale * r.c2;
  return r;
}

inline BinaryMask chan_vese(const GrayImage& image, const ContourPolygon& initial,
                            const ChanVeseParams& params = {}) {
  return chan_vese_run(image, initial, params).mask;
}

}  // namespace csdseg

#endif  // CSDSEG_CHAN_VESE_HPP_
