#ifndef CSDSEG_PIPELINE_HPP_
#define CSDSEG_PIPELINE_HPP_

#include "csdseg/chan_vese.hpp"
#include "csdseg/contour.hpp"
#include "csdseg/distmap.hpp"
#include "csdseg/grid.hpp"
#include "csdseg/localsim.hpp"
#include "csdseg/optimizer.hpp"

namespace csdseg {

struct LsmResult {
  DistanceMapComponents components;
  DescentTrace trace;
  BinaryMask mask;
};

/// Distance map, threshold descent, final region {D_I <= T}.
inline LsmResult segment_lsm(const GrayImage& image, const ContourPolygon& initial,
                             const DistanceMapConfig& dcfg, const LsmParams& params) {
  LsmResult r;
  r.components = build_distance_map_components(image, initial, dcfg);
  r.trace = optimize_threshold(image, r.components.map, params);
  r.mask = region_at(r.components.map, r.trace.final_threshold);
  return r;
}

/// Per-pixel fields of the model at a given region, for inspection.
struct LsmFields {
  RegionStats stats;
  ScalarField lsf1;
  ScalarField lsf2;
};

inline LsmFields lsm_fields(const GrayImage& image, const BinaryMask& region,
                            const LsmParams& params) {
  LsmFields f;
  f.stats = local_means(image, region, params);
  const LsfMoments moments(image, params.window);
  const LsfMoments::Split split = moments.split(region);
  f.lsf1 = ScalarField(image.width(), image.height());
  f.lsf2 = ScalarField(image.width(), image.height());
  for (std::size_t i = 0; i < region.size(); ++i) {
    f.lsf1[i] = split.lsf1(i, f.stats.lc1[i]);
    f.lsf2[i] = split.lsf2(i, f.stats.lc2[i]);
  }
  return f;
}

}  // namespace csdseg

#endif  // CSDSEG_PIPELINE_HPP_
