#include "specgeo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace specgeo {
namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const auto n = static_cast<long>(sorted.size());
  long i = std::lround(q * (n - 1));
  i = std::clamp(i, 0L, n - 1);
  return sorted[i];
}

ComparisonReport ratios_to_report(std::vector<double>& ratios, double h) {
  if (ratios.empty())
    throw std::runtime_error("comparability_report: empty region");
  ComparisonReport rep;
  rep.node_count = static_cast<int>(ratios.size());
  rep.h = h;
  std::sort(ratios.begin(), ratios.end());
  rep.ratio_min = ratios.front();
  rep.ratio_max = ratios.back();
  rep.q01 = quantile(ratios, 0.01);
  rep.q50 = quantile(ratios, 0.50);
  rep.q99 = quantile(ratios, 0.99);
  return rep;
}

}  // namespace

ComparisonReport comparability_report(const Grid& g, const GridField& f,
                                      const PointFn& denom,
                                      const RegionPred& region) {
  if (f.size() != g.size())
    throw std::invalid_argument("comparability_report: field/grid mismatch");
  std::vector<double> ratios;
  ratios.reserve(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Point2 p = g.node_point(k);
    if (region ? !region(p)
               : dist_boundary_unchecked(g.domain(), p) < 2 * g.h())
      continue;
    const double gv = denom(p);
    if (!(gv > 0))
      throw std::runtime_error(
          "comparability_report: denominator not positive on the region");
    ratios.push_back(f[k] / gv);
  }
  return ratios_to_report(ratios, g.h());
}

ComparisonReport comparability_report(const Grid& g, const GridField& f,
                                      const GridField& denom,
                                      const RegionPred& region) {
  if (f.size() != g.size() || denom.size() != g.size())
    throw std::invalid_argument("comparability_report: field/grid mismatch");
  std::vector<double> ratios;
  for (int k = 0; k < g.size(); ++k) {
    const Point2 p = g.node_point(k);
    if (region ? !region(p)
               : dist_boundary_unchecked(g.domain(), p) < 2 * g.h())
      continue;
    if (!(denom[k] > 0))
      throw std::runtime_error(
          "comparability_report: denominator not positive on the region");
    ratios.push_back(f[k] / denom[k]);
  }
  return ratios_to_report(ratios, g.h());
}

SandwichReport sandwich_check(const Grid& grid_V, const GridField& phi_V,
                              const Grid& grid_U, const GridField& phi_U,
                              const Grid& grid_Vc, const GridField& phi_Vc) {
  const double h = grid_V.h();
  if (std::abs(grid_U.h() - h) > 1e-14 * h ||
      std::abs(grid_Vc.h() - h) > 1e-14 * h)
    throw std::invalid_argument("sandwich_check: grids are not on one lattice");
  SandwichReport rep;
  for (int k = 0; k < grid_V.size(); ++k) {
    const auto [ix, iy] = grid_V.node_coords(k);
    const int j = grid_U.index_of(ix, iy);
    if (j < 0) {
      ++rep.skipped_nodes;
      continue;
    }
    if (phi_U[j] > 0)
      rep.sup_inner_over_mid = std::max(rep.sup_inner_over_mid,
                                        phi_V[k] / phi_U[j]);
  }
  for (int k = 0; k < grid_U.size(); ++k) {
    const auto [ix, iy] = grid_U.node_coords(k);
    const int j = grid_Vc.index_of(ix, iy);
    if (j < 0) {
      ++rep.skipped_nodes;
      continue;
    }
    if (phi_Vc[j] > 0)
      rep.sup_mid_over_outer = std::max(rep.sup_mid_over_outer,
                                        phi_U[k] / phi_Vc[j]);
  }
  return rep;
}

SeparationReport max_separation(const Spectrum& spec, const Grid& g,
                                const Domain& d, int k) {
  if (k < 1 || k > spec.k())
    throw std::invalid_argument("max_separation: k out of range");
  const Eigen::VectorXd& phi = spec.phi[k - 1];
  const double maxabs = phi.cwiseAbs().maxCoeff();
  int arg = -1;
  for (int i = 0; i < g.size(); ++i) {
    if (std::abs(phi[i]) >= maxabs * (1 - 1e-12)) {
      arg = i;
      break;  // node order is lexicographic (iy, ix)
    }
  }
  SeparationReport rep;
  rep.k = k;
  rep.x_max = g.node_point(arg);
  rep.phi_value = phi[arg];
  rep.dist = dist_boundary(d, rep.x_max);
  rep.product = rep.dist * std::sqrt(spec.eigenvalues[k - 1]);
  return rep;
}

double near_max_separation(const Spectrum& spec, const Grid& g,
                           const Domain& d, double eps) {
  if (!(eps > 0 && eps < 1))
    throw std::invalid_argument("near_max_separation: eps in (0,1)");
  const Eigen::VectorXd& phi = spec.phi[0];
  const double mx = phi.maxCoeff();
  const double sq = std::sqrt(spec.eigenvalues[0]);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    if (phi[i] < (1 - eps) * mx) continue;
    best = std::min(best, dist_boundary(d, g.node_point(i)) * sq);
  }
  return best;
}

double beta_hypothesis_check(const Spectrum& spec, const Grid& g,
                             const Domain& d, const Point2& x) {
  const int k = g.index_near(x);
  if (k < 0)
    throw std::invalid_argument("beta_hypothesis_check: x is not near a node");
  return spec.phi[0][k] * std::sqrt(area(d));
}

SupNormReport sup_norm_bounds(const Spectrum& spec, double mu_U, double mu_V,
                              double lower_floor) {
  SupNormReport rep;
  const double sup2 = spec.phi[0].cwiseAbs().maxCoeff();
  rep.lower_value = sup2 * sup2 * mu_U;
  rep.upper_constant = sup2 * sup2 * mu_V;
  rep.lower_ok = rep.lower_value >= lower_floor;
  return rep;
}

double interior_oscillation(const Spectrum& spec, const Grid& g,
                            const Domain& d, double delta) {
  const double diam = inner_diameter(d);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (int i = 0; i < g.size(); ++i) {
    if (dist_boundary_unchecked(d, g.node_point(i)) < 2 * delta * diam)
      continue;
    lo = std::min(lo, spec.phi[0][i]);
    hi = std::max(hi, spec.phi[0][i]);
  }
  if (!(lo < std::numeric_limits<double>::infinity()))
    throw std::runtime_error("interior_oscillation: empty delta-interior");
  return hi / lo;
}

CarlesonReport carleson_check(const Spectrum& spec, const Grid& g,
                              const Domain& d, const Point2& xi, double r,
                              double c0, double C2) {
  CarlesonReport rep;
  rep.r_within_cap = r < C2 * inner_diameter(d);
  // geodesic distances from xi approximated through the nearest node
  int src = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    const double dd = (g.node_point(i) - xi).norm();
    if (dd < best) {
      best = dd;
      src = i;
    }
  }
  // Dijkstra over the 4-neighborhood (geodesic within the rasterized domain)
  std::vector<double> dist(g.size(),
                           std::numeric_limits<double>::infinity());
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[src] = best;
  pq.push({dist[src], src});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u] + 1e-15) continue;
    for (int dir = 0; dir < 4; ++dir) {
      const int v = g.neighbors(u)[dir];
      if (v < 0) continue;
      if (dist[u] + g.h() < dist[v] - 1e-15) {
        dist[v] = dist[u] + g.h();
        pq.push({dist[v], v});
      }
    }
  }
  // witness search, relaxing c0 until a candidate exists
  const double band = std::max(g.h(), 0.05 * r);
  int witness = -1;
  double c0_used = c0;
  for (int relax = 0; relax <= 4 && witness < 0; ++relax) {
    for (int i = 0; i < g.size(); ++i) {
      if (std::abs(dist[i] - r / 4) > band) continue;
      if (dist_boundary_unchecked(d, g.node_point(i)) < c0_used * r / 8)
        continue;
      witness = i;
      break;
    }
    if (witness < 0) {
      c0_used /= 2;
      ++rep.relaxations;
    }
  }
  if (witness < 0)
    throw std::runtime_error(
        "carleson_check: no witness node at this resolution");
  rep.witness = g.node_point(witness);
  rep.c0_used = c0_used;
  const double phi_w = spec.phi[0][witness];
  for (int i = 0; i < g.size(); ++i) {
    if (dist[i] > r) continue;
    ++rep.ball_nodes;
    rep.A_emp = std::max(rep.A_emp, spec.phi[0][i] / phi_w);
  }
  return rep;
}

}  // namespace specgeo
