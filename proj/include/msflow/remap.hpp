// Label remapping: detect tangling of the back-to-labels chart and reset it
// to the identity while keeping the momentum map exactly fixed.
#pragma once

#include "msflow/epdiff.hpp"

namespace msflow::remap {

using epdiff::ChState;
using grid::ArrayX;
using grid::GridSpec;

// min_j (l_{j+1} - l_j)/dx over the cyclic forward differences; 1 on the
// identity chart, <= 0 when labels are non-monotone. With displacement
// storage the seam contributes (dx + dl_0 - dl_{n-1})/dx, no wrap branch.
template <typename Scalar>
Scalar tangling_metric(const ChState<Scalar>& s, const GridSpec& g) {
  const Scalar dx = Scalar(g.dx());
  const ArrayX<Scalar> fwd = (grid::roll(s.dl, 1) - s.dl + dx) / dx;
  return fwd.minCoeff();
}

// Resets l to the identity chart with pi' = -m so momentum_map is unchanged
// to round-off (the identity chart has discrete slope exactly 1). u, W, rho
// are untouched.
template <typename Scalar>
ChState<Scalar> remap_to_identity(const ChState<Scalar>& s, const GridSpec& g) {
  ChState<Scalar> out = s;
  out.pi = -epdiff::momentum_map(s, g);
  out.dl = ArrayX<Scalar>::Zero(s.dl.size());
  return out;
}

}  // namespace msflow::remap
