// Uniform-lattice rasterization of a Domain and sparse symmetric Dirichlet
// operators. The lattice is anchored at the plane origin (nodes at integer
// multiples of h), so grids of equal spacing share one master lattice and
// fields on nested domains align node-for-node.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "specgeo/geometry.hpp"

namespace specgeo {

// One value per interior node, in grid storage order.
using GridField = Eigen::VectorXd;

class Grid {
 public:
  double h() const { return h_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Domain& domain() const { return domain_; }

  // Integer lattice coordinates of node k (position = (ix*h, iy*h)).
  std::pair<int, int> node_coords(int k) const { return nodes_[k]; }
  Point2 node_point(int k) const {
    return Point2(nodes_[k].first * h_, nodes_[k].second * h_);
  }
  // Dense index of the lattice point (ix, iy), or -1 when not an interior
  // node of this grid.
  int index_of(int ix, int iy) const;
  int index_near(const Point2& p) const {  // nearest lattice node index
    return index_of(static_cast<int>(std::lround(p.x() / h_)),
                    static_cast<int>(std::lround(p.y() / h_)));
  }

  // Direction order: +x, -x, +y, -y.
  static constexpr std::array<std::array<int, 2>, 4> kDirs{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  // Neighbor node index per direction, -1 if the boundary intervenes.
  const std::array<int, 4>& neighbors(int k) const { return neighbors_[k]; }
  // Distance to the boundary along each direction, in (0, h]; meaningful
  // only where the neighbor index is -1.
  const std::array<double, 4>& gaps(int k) const { return gaps_[k]; }

  double quad_weight() const { return h_ * h_; }
  const std::string& warning() const { return warning_; }

  friend Grid rasterize(const Domain& d, double h);

 private:
  double h_ = 0;
  Domain domain_{PolygonDomain({{0, 0}, {1, 0}, {0, 1}})};
  std::vector<std::pair<int, int>> nodes_;  // sorted by (iy, ix)
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<std::array<double, 4>> gaps_;
  std::unordered_map<int64_t, int> index_;
  std::string warning_;
};

// Interior lattice nodes of d at spacing h with exact boundary gaps from
// ray-boundary intersections. Keeps the largest 4-connected component and
// records a warning when smaller components are dropped.
Grid rasterize(const Domain& d, double h);

struct SparseOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat;

  int n() const { return static_cast<int>(mat.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat * x; }
  Eigen::VectorXd diagonal() const { return mat.diagonal(); }
  // max_{probes} |x'Ay - y'Ax| / (|x||Ay| + |y||Ax|), seeded probes.
  double symmetry_defect(int probes = 8, unsigned seed = 7) const;
  bool tridiagonal() const;
};

// Variational Shortley-Weller Laplacian: edge conductance 1/h^2 between
// linked interior nodes, 1/(g h) into a Dirichlet boundary at gap g, with
// the node-count measure h^2 as quadrature. Exactly symmetric.
SparseOperator assemble_laplacian(const Grid& g);

// Symmetric 2x2 coefficient a(x) sampled where the assembly needs it,
// with a certified ellipticity constant.
struct CoefficientField {
  std::function<Eigen::Matrix2d(const Point2&)> a;
  double Lambda = 1;  // ellipticity bound, >= 1
};

// Divergence-form operator -div(a grad .) by first-order P1 assembly on the
// lattice cells (SW-NE split) with plain masked Dirichlet boundary; reduces
// row-for-row to the masked 5-point Laplacian when a = identity. Ellipticity
// of the samples is checked against Lambda.
SparseOperator assemble_divergence_form(const Grid& g,
                                        const CoefficientField& coeff);

// h^2 * sum of f over interior nodes.
double integrate(const Grid& g, const GridField& f);

// 1-D Dirichlet Laplacian on (0, L) with m interior nodes (spacing
// L/(m+1)), for the interval experiments; quadrature weight is h.
SparseOperator assemble_interval_laplacian(int m, double L);

// Smallest Ritz value of a short Lanczos run (positive-definiteness probe).
double lanczos_smallest_ritz(const SparseOperator& A, int steps = 20,
                             unsigned seed = 11);

}  // namespace specgeo
