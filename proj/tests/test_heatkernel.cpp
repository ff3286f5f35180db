#include <doctest.h>

#include <cmath>
#include <numbers>

#include "specgeo/heatkernel.hpp"
#include "specgeo/rng.hpp"

using namespace specgeo;
namespace {
constexpr double kPi = std::numbers::pi;

struct Solved {
  Domain domain;
  Grid grid;
  Spectrum spec;
};

Solved solve(Domain d, double h, int k) {
  Grid g = rasterize(d, h);
  Spectrum s = smallest_eigenpairs(assemble_laplacian(g), g, k);
  return {std::move(d), std::move(g), std::move(s)};
}

}  // namespace

TEST_CASE("kernel diagonal dominates its leading term") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 8);
  const int c = sq.grid.index_near({0.5, 0.5});
  for (double t : {0.02, 0.05, 0.2}) {
    const auto ev = dirichlet_kernel(sq.spec, t, c, c, 8);
    CHECK(ev.value >= std::exp(-sq.spec.eigenvalues[0] * t) *
                          sq.spec.phi[0][c] * sq.spec.phi[0][c] - 1e-12);
    CHECK(ev.value > 0);
    CHECK(ev.tail == doctest::Approx(std::exp(-sq.spec.eigenvalues[7] * t)));
  }
  CHECK_THROWS_AS(dirichlet_kernel(sq.spec, 1e-9, c, c, 8),
                  std::invalid_argument);
}

TEST_CASE("interval kernel against the analytic series") {
  const int m = 1023;
  const double h = 1.0 / (m + 1);
  SparseOperator A = assemble_interval_laplacian(m, 1.0);
  Spectrum s = smallest_eigenpairs(A, h, 5);
  const int mid = (m - 1) / 2;  // node at x = 0.5
  const auto ev = dirichlet_kernel(s, 1.0, mid, mid, 5);
  // oracle: direct series sum 2 e^{-n^2 pi^2} sin^2(n pi / 2)
  double expect = 0;
  for (int n = 1; n <= 9; ++n)
    expect += 2 * std::exp(-n * n * kPi * kPi) *
              std::pow(std::sin(n * kPi / 2), 2);
  CHECK(ev.value == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("kernel tends to the spectral-gap limit") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 6);
  const int a = sq.grid.index_near({0.3, 0.4});
  const int b = sq.grid.index_near({0.6, 0.7});
  const double t = 1.5;
  const auto ev = dirichlet_kernel(sq.spec, t, a, b, 6);
  const double lead = std::exp(-sq.spec.eigenvalues[0] * t) *
                      sq.spec.phi[0][a] * sq.spec.phi[0][b];
  CHECK(ev.value == doctest::Approx(lead).epsilon(1e-9));
}

TEST_CASE("kernel domain monotonicity") {
  const double h = 1.0 / 48;
  auto inner = solve(Domain(build_rectangle({0, 0}, 1, 1)), h, 12);
  auto outer = solve(Domain(build_rectangle({-0.1, -0.1}, 1.2, 1.2)), h, 12);
  DetRng rng(31);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 100; ++i)
    pairs.push_back({rng.below(inner.grid.size()),
                     rng.below(inner.grid.size())});
  const double t = 1.0 / inner.spec.eigenvalues[0];
  const auto rep = kernel_monotonicity_check(inner.spec, inner.grid,
                                             outer.spec, outer.grid, t, pairs,
                                             12);
  CHECK(rep.pairs == 100);
  CHECK(rep.violations == 0);

  // U = V: equality within rounding
  const auto same = kernel_monotonicity_check(inner.spec, inner.grid,
                                              inner.spec, inner.grid, t,
                                              pairs, 12);
  CHECK(same.violations == 0);
}

TEST_CASE("semigroup property at large t") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 10);
  const double t = 0.08;
  DetRng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int a = rng.below(sq.grid.size());
    const int b = rng.below(sq.grid.size());
    const double lhs = dirichlet_kernel(sq.spec, 2 * t, a, b, 10).value;
    double conv = 0;  // h^2 sum_z p(t,a,z) p(t,z,b)
    for (int z = 0; z < sq.grid.size(); ++z)
      conv += dirichlet_kernel(sq.spec, t, a, z, 10).value *
              dirichlet_kernel(sq.spec, t, z, b, 10).value;
    conv *= sq.grid.quad_weight();
    CHECK(lhs == doctest::Approx(conv).epsilon(1e-8));
  }
}

TEST_CASE("iu ratio properties") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 48, 20);
  const int c = sq.grid.index_near({0.52, 0.48});
  const int d = sq.grid.index_near({0.23, 0.71});
  // x = y: the corrections are squares
  for (double t : {0.05, 0.2, 1.0})
    CHECK(iu_ratio(sq.spec, t, c, c, 20) >= 1.0 - 1e-12);
  // large t: ratio -> 1 at the spectral-gap rate
  const double gap = sq.spec.eigenvalues[1] - sq.spec.eigenvalues[0];
  double M = 0;
  for (int j = 1; j < 20; ++j)
    M += std::pow(sq.spec.phi[j][c] / sq.spec.phi[0][c], 2) +
         std::pow(sq.spec.phi[j][d] / sq.spec.phi[0][d], 2);
  for (double t : {0.3, 0.6, 1.2}) {
    const double dev = std::abs(iu_ratio(sq.spec, t, c, d, 20) - 1);
    CHECK(dev <= std::exp(-gap * t) * M + 1e-12);
  }
  // t = 2 diam^2 on the unit square: numerically exactly 1
  CHECK(std::abs(iu_ratio(sq.spec, 4.0, c, d, 20) - 1) < 1e-10);
}

TEST_CASE("iu ratio time floor flag") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 6);
  const int c = sq.grid.index_near({0.5, 0.5});
  CHECK(iu_ratio_checked(sq.spec, 0.5, c, c, 6, std::sqrt(2.0)).below_t_floor);
  CHECK_FALSE(
      iu_ratio_checked(sq.spec, 1.5, c, c, 6, std::sqrt(2.0)).below_t_floor);
}

TEST_CASE("phi^2 ball volume") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 1);
  GridGeodesic geo(sq.grid);
  const auto dist = geo.distances_from(sq.grid.index_near({0.5, 0.5}));
  CHECK(phi2_ball_volume(sq.spec, dist, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  // a vanishing radius keeps only the source node, weight ~ h^2 phi^2
  CHECK(phi2_ball_volume(sq.spec, dist, 1e-9) <= 5e-3);
  double prev = 0;
  for (double r : {0.1, 0.2, 0.3, 0.5, 0.8}) {
    const double v = phi2_ball_volume(sq.spec, dist, r);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("grid geodesic metrication error stays below the stencil bound") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 64, 1);
  GridGeodesic geo(sq.grid);
  const int src = sq.grid.index_near({0.25, 0.25});
  const auto dist = geo.distances_from(src);
  DetRng rng(41);
  for (int i = 0; i < 40; ++i) {
    const int j = rng.below(sq.grid.size());
    const double exact =
        (sq.grid.node_point(src) - sq.grid.node_point(j)).norm();
    if (exact < 0.1) continue;
    CHECK(dist[j] >= exact - 1e-12);
    CHECK(dist[j] <= exact * 1.028);
  }
}

TEST_CASE("envelope fit on the unit square") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 20);
  DetRng rng(29);
  const double lam1 = sq.spec.eigenvalues[0];
  std::vector<EnvelopeSample> samples;
  while (samples.size() < 60) {
    EnvelopeSample s;
    s.t = std::exp(rng.uniform(std::log(0.5 / lam1), std::log(3.0 / lam1)));
    s.node_x = rng.below(sq.grid.size());
    s.node_y = rng.below(sq.grid.size());
    const Point2 px = sq.grid.node_point(s.node_x);
    const Point2 py = sq.grid.node_point(s.node_y);
    if (dist_boundary_unchecked(sq.domain, px) < 2 * sq.grid.h()) continue;
    if (dist_boundary_unchecked(sq.domain, py) < 2 * sq.grid.h()) continue;
    if ((px - py).squaredNorm() > 16 * s.t) continue;
    samples.push_back(s);
  }
  const auto fit = kernel_envelope_fit(sq.spec, sq.grid, samples);
  CHECK(fit.ok);
  CHECK(fit.c1 > 0);
  CHECK(fit.c3 > 0);
  CHECK(fit.c1_over_c3 < 1e3);
  CHECK(fit.c2 <= fit.c4);
}

TEST_CASE("disk green function") {
  CHECK(green_disk(1.0, {0, 0}, {0.5, 0}, GreenMode::kInterior) ==
        doctest::Approx(std::log(2.0) / (2 * kPi)).epsilon(1e-12));
  // vanishes on the circle
  CHECK(green_disk(1.0, {0.3, 0.2}, {0.6, 0.8}, GreenMode::kInterior) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // symmetric in its arguments
  DetRng rng(37);
  for (int i = 0; i < 30; ++i) {
    Point2 x(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
    Point2 y(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6));
    if ((x - y).norm() < 0.05 || x.norm() < 0.05) continue;
    CHECK(green_disk(1.0, x, y, GreenMode::kInterior) ==
          doctest::Approx(green_disk(1.0, y, x, GreenMode::kInterior))
              .epsilon(1e-12));
  }
  CHECK_THROWS_AS(green_disk(1.0, {0.2, 0.2}, {0.2, 0.2}, GreenMode::kInterior),
                  std::invalid_argument);
}

TEST_CASE("green formula for n >= 3") {
  Eigen::VectorXd x(3), y(3);
  x << 0.3, 0.1, -0.2;
  y << 0.6, 0.0, 0.55;  // |y| near but inside the unit sphere
  y *= 1.0 / y.norm() * 0.999999;
  // nearly zero on the boundary sphere
  CHECK(std::abs(green_ball_formula(3, 1.0, x, y)) < 1e-5);
  Eigen::VectorXd y2(3);
  y2 << 0.2, -0.4, 0.1;
  CHECK(green_ball_formula(3, 1.0, x, y2) ==
        doctest::Approx(green_ball_formula(3, 1.0, y2, x)).epsilon(1e-10));
}

TEST_CASE("green linear decay brackets") {
  // rho = eps/2 on a radius: ratio 2 ln 2 / (2 pi)
  const auto rep = green_linear_check(1.0, GreenMode::kInterior,
                                      {{0.5, 0.0}});
  CHECK(rep.ratio_min == doctest::Approx(std::log(2.0) / kPi).epsilon(1e-12));
  // rho -> 0 along a radius tends to 1/(2 pi)
  const auto lim = green_linear_check(1.0, GreenMode::kInterior,
                                      {{1 - 1e-7, 0.0}});
  CHECK(lim.ratio_min == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-5));
  // exact scale invariance across eps
  for (GreenMode mode : {GreenMode::kInterior, GreenMode::kExterior}) {
    double base_min = 0, base_max = 0;
    bool first = true;
    for (double eps : {0.1, 1.0, 10.0}) {
      std::vector<Point2> ys;
      DetRng rng(43);
      for (int i = 0; i < 40; ++i) {
        const double rho = rng.uniform(1e-4, 0.03) * eps;
        const double th = rng.uniform(0, 2 * kPi);
        const double r = mode == GreenMode::kInterior ? eps - rho : eps + rho;
        ys.push_back(r * Point2(std::cos(th), std::sin(th)));
      }
      const auto r = green_linear_check(eps, mode, ys);
      if (first) {
        base_min = r.ratio_min;
        base_max = r.ratio_max;
        first = false;
      } else {
        CHECK(r.ratio_min == doctest::Approx(base_min).epsilon(1e-10));
        CHECK(r.ratio_max == doctest::Approx(base_max).epsilon(1e-10));
      }
    }
    CHECK(base_min >= 0.05);
    CHECK(base_max <= 0.5);
  }
  // across the full admissible range rho <= 3 eps / 4 the two-sided
  // constants are wider: the far-side exterior ratio bottoms out near 0.0387
  const auto far = green_linear_check(1.0, GreenMode::kExterior,
                                      {{0.0, -1.75}});
  CHECK(far.ratio_min ==
        doctest::Approx(std::log(1.2) / (2 * kPi) / 0.75).epsilon(1e-10));
  CHECK(far.ratio_min > 0.03);
}

TEST_CASE("kernel warning flag below the recommended time") {
  auto sq = solve(Domain(build_rectangle({0, 0}, 1, 1)), 1.0 / 32, 8);
  const int c = sq.grid.index_near({0.5, 0.5});
  const double lam1 = sq.spec.eigenvalues[0];
  const double lamK = sq.spec.eigenvalues[7];
  const double t_mid = 0.5 * (0.1 / lamK + 0.1 / lam1);
  CHECK(dirichlet_kernel(sq.spec, t_mid, c, c, 8).below_recommended_t);
  CHECK_FALSE(dirichlet_kernel(sq.spec, 0.2 / lam1, c, c, 8)
                  .below_recommended_t);
}
