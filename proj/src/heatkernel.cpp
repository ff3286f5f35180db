#include "specgeo/heatkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace specgeo {
namespace {

constexpr double kPi = std::numbers::pi;

double kernel_sum(const Spectrum& spec, double t, int x, int y, int K) {
  double s = 0;
  for (int j = 0; j < K; ++j)
    s += std::exp(-spec.eigenvalues[j] * t) * spec.phi[j][x] * spec.phi[j][y];
  return s;
}

}  // namespace

KernelEval dirichlet_kernel(const Spectrum& spec, double t, int node_x,
                            int node_y, int K) {
  if (K < 1 || K > spec.k())
    throw std::invalid_argument("dirichlet_kernel: K out of range");
  if (!(t > 0)) throw std::invalid_argument("dirichlet_kernel: t > 0");
  const double lamK = spec.eigenvalues[K - 1];
  if (t < 0.1 / lamK)
    throw std::invalid_argument(
        "dirichlet_kernel: t below the truncation floor 0.1/lambda_K");
  KernelEval out;
  out.t = t;
  out.K = K;
  out.value = kernel_sum(spec, t, node_x, node_y, K);
  out.tail = std::exp(-lamK * t);
  out.below_recommended_t = t < 0.1 / spec.eigenvalues[0];
  return out;
}

KernelMonotonicityReport kernel_monotonicity_check(
    const Spectrum& spec_U, const Grid& grid_U, const Spectrum& spec_V,
    const Grid& grid_V, double t, const std::vector<std::pair<int, int>>& pairs,
    int K) {
  if (std::abs(grid_U.h() - grid_V.h()) > 1e-14 * grid_U.h())
    throw std::invalid_argument(
        "kernel_monotonicity_check: grids are not on one lattice");
  KernelMonotonicityReport rep;
  double sup2 = 0;
  for (int j = 0; j < K; ++j) {
    sup2 = std::max(sup2, spec_U.phi[j].cwiseAbs().maxCoeff());
    sup2 = std::max(sup2, spec_V.phi[j].cwiseAbs().maxCoeff());
  }
  rep.tol = (std::exp(-spec_U.eigenvalues[K - 1] * t) +
             std::exp(-spec_V.eigenvalues[K - 1] * t)) *
                sup2 * sup2 +
            1e-12;
  for (const auto& [ax, ay] : pairs) {
    const auto [ix1, iy1] = grid_U.node_coords(ax);
    const auto [ix2, iy2] = grid_U.node_coords(ay);
    const int bx = grid_V.index_of(ix1, iy1);
    const int by = grid_V.index_of(ix2, iy2);
    if (bx < 0 || by < 0) continue;
    const double pU = kernel_sum(spec_U, t, ax, ay, K);
    const double pV = kernel_sum(spec_V, t, bx, by, K);
    ++rep.pairs;
    const double excess = pU - pV - rep.tol;
    rep.max_violation = std::max(rep.max_violation, excess);
    if (excess > 0) ++rep.violations;
  }
  return rep;
}

double iu_ratio(const Spectrum& spec, double t, int node_x, int node_y,
                int K) {
  const double denom = std::exp(-spec.eigenvalues[0] * t) *
                       spec.phi[0][node_x] * spec.phi[0][node_y];
  if (!(denom > 0))
    throw std::invalid_argument("iu_ratio: phi_1 must be positive at x, y");
  return kernel_sum(spec, t, node_x, node_y, K) / denom;
}

IuRatio iu_ratio_checked(const Spectrum& spec, double t, int node_x,
                         int node_y, int K, double diam, double C) {
  IuRatio out;
  out.value = iu_ratio(spec, t, node_x, node_y, K);
  out.below_t_floor = t < C * diam * diam;
  return out;
}

GridGeodesic::GridGeodesic(const Grid& g) : grid_(&g) {
  static const std::array<std::array<int, 2>, 16> stencil = {{{1, 0},
                                                              {-1, 0},
                                                              {0, 1},
                                                              {0, -1},
                                                              {1, 1},
                                                              {1, -1},
                                                              {-1, 1},
                                                              {-1, -1},
                                                              {1, 2},
                                                              {1, -2},
                                                              {-1, 2},
                                                              {-1, -2},
                                                              {2, 1},
                                                              {2, -1},
                                                              {-2, 1},
                                                              {-2, -1}}};
  const Domain& d = g.domain();
  adj_.assign(g.size(), {});
  for (int k = 0; k < g.size(); ++k) {
    const auto [ix, iy] = g.node_coords(k);
    const Point2 p = g.node_point(k);
    for (const auto& s : stencil) {
      const int j = g.index_of(ix + s[0], iy + s[1]);
      if (j <= k) continue;  // undirected, add once
      const Point2 q = g.node_point(j);
      bool ok;
      if (std::abs(s[0]) + std::abs(s[1]) == 1) {
        // axis hop: the rasterizer's gap data already encodes blockage
        int dir = s[0] == 1 ? 0 : s[0] == -1 ? 1 : s[1] == 1 ? 2 : 3;
        ok = g.neighbors(k)[dir] == j;
      } else {
        ok = segment_inside(d, p, q);
      }
      if (!ok) continue;
      const float w = static_cast<float>((p - q).norm());
      adj_[k].push_back({j, w});
      adj_[j].push_back({k, w});
    }
  }
}

Eigen::VectorXd GridGeodesic::distances_from(int source) const {
  const int n = static_cast<int>(adj_.size());
  Eigen::VectorXd dist =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[source] = 0;
  pq.push({0, source});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u] + 1e-15) continue;
    for (auto [v, w] : adj_[u]) {
      if (dist[u] + w < dist[v] - 1e-15) {
        dist[v] = dist[u] + w;
        pq.push({dist[v], v});
      }
    }
  }
  return dist;
}

double phi2_ball_volume(const Spectrum& spec, const Eigen::VectorXd& geo_dist,
                        double r) {
  if (!(r > 0)) return 0;
  double s = 0;
  for (int i = 0; i < geo_dist.size(); ++i) {
    if (geo_dist[i] <= r) s += spec.phi[0][i] * spec.phi[0][i];
  }
  return spec.quad_weight * s;
}

EnvelopeFit kernel_envelope_fit(const Spectrum& spec, const Grid& g,
                               const std::vector<EnvelopeSample>& samples,
                               const EnvelopeOptions& opts) {
  if (opts.K > spec.k())
    throw std::invalid_argument("kernel_envelope_fit: K exceeds computed pairs");
  GridGeodesic geo(g);
  // group by source node so each unique endpoint costs one Dijkstra run
  std::vector<int> order(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return samples[a].node_x < samples[b].node_x;
  });

  std::vector<double> ratio(samples.size()), gauss(samples.size());
  int last_src = -1;
  Eigen::VectorXd dist_x;
  for (int idx : order) {
    const auto& s = samples[idx];
    if (s.node_x != last_src) {
      dist_x = geo.distances_from(s.node_x);
      last_src = s.node_x;
    }
    const double rt = std::sqrt(s.t);
    const double Vx = phi2_ball_volume(spec, dist_x, rt);
    const Eigen::VectorXd dist_y = geo.distances_from(s.node_y);
    const double Vy = phi2_ball_volume(spec, dist_y, rt);
    const double p = kernel_sum(spec, s.t, s.node_x, s.node_y, opts.K);
    const double phixy = spec.phi[0][s.node_x] * spec.phi[0][s.node_y];
    const double dgeo = dist_x[s.node_y];
    const double deuc = (g.node_point(s.node_x) - g.node_point(s.node_y)).norm();
    const double d = opts.geodesic_distance ? dgeo : deuc;
    if (!(Vx > 0 && Vy > 0 && phixy > 0))
      throw std::runtime_error("kernel_envelope_fit: degenerate sample");
    ratio[idx] = p * std::sqrt(Vx * Vy) / phixy;
    gauss[idx] = d * d / s.t;
  }

  EnvelopeFit fit;
  const auto& cg = opts.c_grid;
  auto c1_of = [&](double c2) {
    double m = 0;
    for (size_t i = 0; i < ratio.size(); ++i)
      m = std::max(m, ratio[i] * std::exp(gauss[i] / c2));
    return m;
  };
  auto c3_of = [&](double c4, int* argmin) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ratio.size(); ++i) {
      const double v = ratio[i] * std::exp(gauss[i] / c4);
      if (v < m) {
        m = v;
        if (argmin) *argmin = static_cast<int>(i);
      }
    }
    return m;
  };
  double best1 = std::numeric_limits<double>::infinity();
  for (double c2 : cg) best1 = std::min(best1, c1_of(c2));
  fit.c2 = cg.back();
  for (double c2 : cg) {
    if (c1_of(c2) <= 4 * best1) {
      fit.c2 = c2;
      break;
    }
  }
  fit.c1 = c1_of(fit.c2);
  double best3 = -std::numeric_limits<double>::infinity();
  for (double c4 : cg) best3 = std::max(best3, c3_of(c4, nullptr));
  fit.c4 = cg.front();
  for (auto it = cg.rbegin(); it != cg.rend(); ++it) {
    const double v = c3_of(*it, nullptr);
    if (v > 0 && v >= best3 / 4) {
      fit.c4 = *it;
      break;
    }
  }
  fit.c3 = c3_of(fit.c4, &fit.worst_sample);
  fit.ok = std::isfinite(fit.c1) && fit.c1 > 0 && fit.c3 > 0;
  fit.c1_over_c3 = fit.ok ? fit.c1 / fit.c3 : 0;
  return fit;
}

double green_disk(double eps, const Point2& x, const Point2& y,
                  GreenMode mode) {
  if (!(eps > 0)) throw std::invalid_argument("green_disk: eps > 0");
  const double nx = x.norm(), ny = y.norm();
  if ((x - y).norm() < 1e-14 * eps)
    throw std::invalid_argument("green_disk: singular at x = y");
  if (mode == GreenMode::kInterior) {
    if (nx > eps * (1 + 1e-12) || ny > eps * (1 + 1e-12))
      throw std::invalid_argument("green_disk: points outside the disk");
    if (nx < 1e-14 * eps) return -std::log(ny / eps) / (2 * kPi);
  } else {
    if (nx < eps * (1 - 1e-12) || ny < eps * (1 - 1e-12))
      throw std::invalid_argument("green_disk: points inside the disk");
  }
  const Point2 xstar = (eps * eps / (nx * nx)) * x;
  return -std::log((x - y).norm()) / (2 * kPi) +
         std::log(nx * (y - xstar).norm() / eps) / (2 * kPi);
}

double green_ball_formula(int n, double eps, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  if (n < 3) throw std::invalid_argument("green_ball_formula: n >= 3");
  if (x.size() != n || y.size() != n)
    throw std::invalid_argument("green_ball_formula: dimension mismatch");
  const double nx = x.norm();
  const double omega_n = std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1);
  const double c = 1.0 / (n * (n - 2) * omega_n);
  if (nx < 1e-300) {
    return c * (std::pow(y.norm(), 2.0 - n) - std::pow(eps, 2.0 - n));
  }
  const Eigen::VectorXd xstar = (eps * eps / (nx * nx)) * x;
  return c * (std::pow((x - y).norm(), 2.0 - n) -
              std::pow(eps, n - 2.0) /
                  (std::pow(nx, n - 2.0) * std::pow((y - xstar).norm(), n - 2.0)));
}

GreenLinearReport green_linear_check(double eps, GreenMode mode,
                                     const std::vector<Point2>& ys) {
  GreenLinearReport rep;
  rep.ratio_min = std::numeric_limits<double>::infinity();
  const Point2 pole = mode == GreenMode::kInterior ? Point2(0, 0)
                                                   : Point2(0, 2 * eps);
  for (const auto& y : ys) {
    const double rho = mode == GreenMode::kInterior ? eps - y.norm()
                                                    : y.norm() - eps;
    if (!(rho > 0 && rho <= 0.75 * eps + 1e-12))
      throw std::invalid_argument(
          "green_linear_check: sample outside rho <= 3 eps / 4");
    const double G = green_disk(eps, pole, y, mode);
    const double ratio = G * eps / rho;
    rep.ratio_min = std::min(rep.ratio_min, ratio);
    rep.ratio_max = std::max(rep.ratio_max, ratio);
    ++rep.samples;
  }
  return rep;
}

}  // namespace specgeo
