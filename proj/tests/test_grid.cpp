#include <doctest.h>

#include <cmath>

#include "specgeo/grid.hpp"

using namespace specgeo;

TEST_CASE("rasterize unit square") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  Grid g = rasterize(sq, 0.25);
  CHECK(g.size() == 9);
  // full uniform interior: every direction either links or has gap h
  for (int k = 0; k < g.size(); ++k) {
    for (int dir = 0; dir < 4; ++dir) {
      if (g.neighbors(k)[dir] < 0)
        CHECK(g.gaps(k)[dir] == doctest::Approx(0.25));
    }
  }
  CHECK_THROWS_AS(rasterize(sq, 0.36), std::invalid_argument);  // too coarse
}

TEST_CASE("rasterize disk keeps strictly interior lattice points") {
  Domain disk(EllipseDomain({0, 0}, 1, 1));
  Grid g = rasterize(disk, 0.11);
  for (int k = 0; k < g.size(); ++k) {
    CHECK(contains(disk, g.node_point(k)));
  }
  // every interior lattice point of the bounding box is present
  for (int iy = -9; iy <= 9; ++iy)
    for (int ix = -9; ix <= 9; ++ix) {
      const Point2 p(ix * 0.11, iy * 0.11);
      if (contains(disk, p)) CHECK(g.index_of(ix, iy) >= 0);
    }
  // boundary gaps are exact ray-circle distances
  for (int k = 0; k < g.size(); ++k) {
    const Point2 p = g.node_point(k);
    for (int dir = 0; dir < 4; ++dir) {
      if (g.neighbors(k)[dir] >= 0) continue;
      const Point2 d(Grid::kDirs[dir][0], Grid::kDirs[dir][1]);
      // solve |p + t d| = 1
      const double b = 2 * p.dot(d);
      const double c = p.squaredNorm() - 1;
      const double t = (-b + std::sqrt(b * b - 4 * c)) / 2;
      CHECK(g.gaps(k)[dir] == doctest::Approx(std::min(t, 0.11)).epsilon(1e-10));
    }
  }
}

TEST_CASE("slit acts as a zero-width Dirichlet wall") {
  PolygonDomain ss({{0, 0}, {1, 0}, {1, 1}, {0.5, 1}, {0, 1}},
                   {Segment{{0.5, 0.5}, {0.5, 1.0}}});
  const double h = 1.0 / 16;
  Grid g = rasterize(Domain(ss), h);
  // lattice points on the slit (x = 0.5 = 8h, upper half) are exterior
  CHECK(g.index_of(8, 12) == -1);
  CHECK(g.index_of(8, 4) >= 0);  // below the slit the column is interior
  // nodes flanking the slit see a Dirichlet gap, not each other
  const int left = g.index_of(7, 12);
  const int right = g.index_of(9, 12);
  REQUIRE(left >= 0);
  REQUIRE(right >= 0);
  CHECK(g.neighbors(left)[0] == -1);
  CHECK(g.gaps(left)[0] == doctest::Approx(h));
  CHECK(g.neighbors(right)[1] == -1);
  CHECK(g.gaps(right)[1] == doctest::Approx(h));
}

TEST_CASE("laplacian assembly is symmetric positive definite") {
  Domain disk(EllipseDomain({0, 0}, 1, 1));
  Grid g = rasterize(disk, 1.0 / 24);
  SparseOperator A = assemble_laplacian(g);
  CHECK(A.symmetry_defect() < 1e-12);
  CHECK(lanczos_smallest_ritz(A, 20) > 0);
}

TEST_CASE("interior stencil rows") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  const double h = 1.0 / 8;
  Grid g = rasterize(sq, h);
  SparseOperator A = assemble_laplacian(g);
  const int k = g.index_of(4, 4);  // center node, all gaps h
  double diag = 0;
  int offs = 0;
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A.mat, k);
       it; ++it) {
    if (it.col() == k) diag = it.value();
    else {
      CHECK(it.value() == doctest::Approx(-1.0 / (h * h)));
      ++offs;
    }
  }
  CHECK(diag == doctest::Approx(4.0 / (h * h)));
  CHECK(offs == 4);
}

TEST_CASE("divergence form reduces to the masked laplacian at a = I") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  Grid g = rasterize(sq, 1.0 / 16);
  SparseOperator L = assemble_laplacian(g);
  CoefficientField ident{[](const Point2&) { return Eigen::Matrix2d::Identity(); },
                         1.0};
  SparseOperator D = assemble_divergence_form(g, ident);
  CHECK((D.mat - L.mat).norm() < 1e-10);

  CoefficientField twice{[](const Point2&) {
                           return (2 * Eigen::Matrix2d::Identity()).eval();
                         },
                         2.0};
  SparseOperator D2 = assemble_divergence_form(g, twice);
  CHECK((D2.mat - 2 * L.mat).norm() < 1e-10);
  CHECK(D.symmetry_defect() < 1e-12);
  CHECK(lanczos_smallest_ritz(D, 20) > 0);
}

TEST_CASE("divergence form rejects coefficients breaking the declared bound") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  Grid g = rasterize(sq, 1.0 / 16);
  Eigen::Matrix2d bad;
  bad << 1, 0.999, 0.999, 1;  // eigenvalues 0.001 and 1.999
  CoefficientField cf{[bad](const Point2&) { return bad; }, 1.5};
  CHECK_THROWS_AS(assemble_divergence_form(g, cf), std::invalid_argument);
}

TEST_CASE("integrate uses the node-count measure") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  Grid g = rasterize(sq, 0.25);
  CHECK(integrate(g, GridField::Ones(9)) == doctest::Approx(0.5625));
  CHECK(integrate(g, GridField::Zero(9)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(integrate(g, GridField::Ones(5)), std::invalid_argument);
}

TEST_CASE("interval laplacian") {
  SparseOperator A = assemble_interval_laplacian(7, 1.0);
  CHECK(A.tridiagonal());
  CHECK(A.symmetry_defect() < 1e-14);
}
