// Closed-form profiles comparable (up to two-sided constants) to principal
// Dirichlet eigenfunctions: interval, triangle, perturbed triangle, generic
// and regular polygons, ellipse, and rounded square/triangle variants.
#pragma once

#include <functional>

#include "specgeo/geometry.hpp"

namespace specgeo {

// 2 sqrt(2) a^{-3/2} min{x, a-x} on the interval (0, a).
double phi_interval(double a, double x);

// d1 d2 d3 (d1+d3)^{pi/a2-2} (d2+d3)^{pi/a1-2} (d1+d2)^{pi/a3-2}
//   / diam(T)^{pi/a1+pi/a2+pi/a3-2},
// with d_i the distance to the side opposite vertex i and diam the longest
// side. Zero on the boundary; throws for exterior points.
double phi_triangle(const PolygonDomain& T, const Point2& p);

// Profile of a triangle with a small outward epsilon-bump: the displayed
// rational factor times phi_T(x_eps) on 2B, phi_T itself off 2B (the two
// branches are comparable on the overlap annulus). phi_T must be one fixed
// realization (caricature or eigenfield evaluator) used for both branches.
double phi_perturbed_triangle(const PerturbedTriangle& U,
                              const std::function<double(const Point2&)>& phi_T,
                              double phiT_at_xeps, const Point2& p);
// Convenience overload evaluating phi_T at x_eps internally.
double phi_perturbed_triangle(const PerturbedTriangle& U,
                              const std::function<double(const Point2&)>& phi_T,
                              const Point2& p);
// The near-bump rational factor alone (without phi_T(x_eps)); exposed for
// branch-agreement diagnostics.
double perturbed_triangle_near_factor(const PerturbedTriangle& U,
                                      const Point2& p);

// Generic polygon profile with geodesic side distances and caller scale r:
// prod_i d_i * prod_i (d_i + d_{i+1})^{pi/alpha_i - 2} / r^{sum pi/alpha_i - N + 1}
// where alpha_i is the interior angle between sides i and i+1.
double phi_polygon(const PolygonDomain& P, double r, const Point2& p);

// Side-comparability and angle-floor checks backing phi_polygon; the
// remaining hypotheses (boundary ball covers) are existential and left to
// the caller.
struct PolygonAssumptions {
  double side_ratio = 1;   // max side / min side
  double min_angle = 0;    // radians
  bool ok = false;
};
PolygonAssumptions check_polygon_assumptions(const PolygonDomain& P,
                                             double side_ratio_cap,
                                             double angle_floor);

// Regular n-gon profile,
// min{d_i d_{i+1}} * min{d_i + d_{i+1}}^{n/(n-2)-2} / (n l)^{n/(n-2)+1}.
double phi_regular_polygon(const PolygonDomain& P, const Point2& p);

// dist(p, boundary) / diam^2 for planar ellipses.
double phi_ellipse(const EllipseDomain& E, const Point2& p);

// Rounded square [-l,l]^2 with corner quarter circles of radius eps:
// rho_U/(rho_U+eps) * (1/l) cos(pi x_eps / 2l) cos(pi y_eps / 2l) with the
// coordinates clamped to +-(l - eps/sqrt(2)).
double phi_rounded_square(double l, double eps, const Point2& p);

// eps-neighborhood of a triangle: rho_U/(rho_U+eps) * Phi_T(x_eps) where
// x_eps is the closest point of the inner triangle T^eps (vertices pulled in
// by eps along the angle bisectors).
double phi_rounded_triangle(const PolygonDomain& T, double eps,
                            const std::function<double(const Point2&)>& phi_T,
                            const Point2& p);
double phi_rounded_triangle(const PolygonDomain& T, double eps,
                            const Point2& p);

}  // namespace specgeo
