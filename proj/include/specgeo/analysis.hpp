// Empirical comparability machinery: ratio statistics between eigenfields
// and caricatures or other eigenfields, two-sided sandwich checks on nested
// domains, maximum-location separation, sup-norm and interior-oscillation
// checks, and a Carleson-type boundary-ball check.
#pragma once

#include <functional>
#include <optional>

#include "specgeo/grid.hpp"
#include "specgeo/spectral.hpp"

namespace specgeo {

struct ComparisonReport {
  int node_count = 0;
  double ratio_min = 0;
  double ratio_max = 0;
  double q01 = 0, q50 = 0, q99 = 0;
  double h = 0;
  double bracket() const { return ratio_max / ratio_min; }
};

using PointFn = std::function<double(const Point2&)>;
using RegionPred = std::function<bool(const Point2&)>;

// Ratio statistics of f over g on the region nodes (default region: nodes
// with dist_boundary >= 2h). g must be positive on the region.
ComparisonReport comparability_report(const Grid& g, const GridField& f,
                                      const PointFn& denom,
                                      const RegionPred& region = nullptr);
ComparisonReport comparability_report(const Grid& g, const GridField& f,
                                      const GridField& denom,
                                      const RegionPred& region = nullptr);

struct SandwichReport {
  double sup_inner_over_mid = 0;  // sup over V of phi_V / phi_U
  double sup_mid_over_outer = 0;  // sup over U of phi_U / phi_Vc
  int skipped_nodes = 0;          // lattice nodes missing from the larger grid
};

// Fields must live on grids of one common lattice (equal spacing); nodes are
// matched by absolute integer coordinates.
SandwichReport sandwich_check(const Grid& grid_V, const GridField& phi_V,
                              const Grid& grid_U, const GridField& phi_U,
                              const Grid& grid_Vc, const GridField& phi_Vc);

struct SeparationReport {
  int k = 0;
  Point2 x_max;
  double phi_value = 0;
  double dist = 0;     // dist(x_max, boundary)
  double product = 0;  // dist * sqrt(lambda_k)
};

// Locates argmax |phi_k| (lexicographic tie-break in node order) and returns
// dist(x_k, boundary) * sqrt(lambda_k).
SeparationReport max_separation(const Spectrum& spec, const Grid& g,
                                const Domain& d, int k);

// Min over the (1-eps)-superlevel set of phi_1 of dist * sqrt(lambda_1).
double near_max_separation(const Spectrum& spec, const Grid& g,
                           const Domain& d, double eps);

// beta(x) = phi_1(x) sqrt(mu(U)) at the node nearest to x.
double beta_hypothesis_check(const Spectrum& spec, const Grid& g,
                             const Domain& d, const Point2& x);

struct SupNormReport {
  double lower_value = 0;     // |phi|_inf^2 * mu(U), expected >= ~1
  double upper_constant = 0;  // |phi|_inf^2 * mu(V)
  bool lower_ok = false;
};
SupNormReport sup_norm_bounds(const Spectrum& spec, double mu_U, double mu_V,
                              double lower_floor = 0.95);

// sup/inf of phi_1 over the delta-interior {dist >= 2 delta diam}.
double interior_oscillation(const Spectrum& spec, const Grid& g,
                            const Domain& d, double delta);

struct CarlesonReport {
  double A_emp = 0;       // max over ball nodes of phi / phi(x_r)
  Point2 witness;         // x_r
  double c0_used = 0;     // after any relaxation
  int relaxations = 0;
  int ball_nodes = 0;
  bool r_within_cap = true;
};

// Empirical constant of the boundary-ball estimate: witness x_r searched at
// geodesic distance ~ r/4 from xi with dist_boundary >= c0 r / 8, relaxing
// c0 by factors of 2 while no witness exists at this resolution.
CarlesonReport carleson_check(const Spectrum& spec, const Grid& g,
                              const Domain& d, const Point2& xi, double r,
                              double c0 = 0.1, double C2 = 0.25);

}  // namespace specgeo
