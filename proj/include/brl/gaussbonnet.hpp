#pragma once

#include "brl/raytrace.hpp"

namespace brl {

// Terms of the Gauss-Bonnet identity for the region Omega enclosed by a
// geodesic chord gamma with both endpoints on `curve` and the arc sigma
// joining them along the curve:
//   int_Omega K dSigma - int_0^a <D_t sigma', nu> dt = 2 pi - (alpha + beta)
// with nu the normal pointing out of M, alpha the oriented angle from
// gamma'(b) to sigma'(0) and beta from sigma'(a) to gamma'(0).
struct GaussBonnetBreakdown {
  double area_term = 0.0;  // int_Omega K dSigma
  double arc_term = 0.0;   // int <D_t sigma', nu> dt, g-arclength
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;   // |area - arc - (2 pi - (alpha + beta))|
};

// The chord is a traced geodesic segment whose first and last samples lie on
// `curve`. The arc is chosen automatically so that the concatenated loop runs
// counterclockwise around the enclosed region.
GaussBonnetBreakdown gauss_bonnet_check(const Scenario& scenario,
                                        const BoundaryCurve& curve,
                                        const RaySegment& chord,
                                        int area_grid = 400);

// Scans a boundary fan of roughly n_rays broken rays for a geodesic segment
// with both endpoints on the obstacle (two consecutive reflections). Throws
// NoDoubleHit when every sampled ray reflects at most once.
RaySegment find_double_hit(const Scenario& scenario, std::size_t n_rays);

}  // namespace brl
