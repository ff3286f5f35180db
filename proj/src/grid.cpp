#include "specgeo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include "specgeo/rng.hpp"
#include <stdexcept>

namespace specgeo {
namespace {

int64_t key_of(int ix, int iy) {
  return (static_cast<int64_t>(ix) << 32) ^ (static_cast<uint32_t>(iy));
}

double cheap_diameter_lower_bound(const Domain& d) {
  if (const auto* poly = d.as_polygon()) return poly->vertex_diameter();
  if (const auto* e = d.as_ellipse()) return 2 * e->a;
  const auto& rd = std::get<RoundedDomain>(d.shape);
  return rd.base.vertex_diameter();
}

}  // namespace

int Grid::index_of(int ix, int iy) const {
  auto it = index_.find(key_of(ix, iy));
  return it == index_.end() ? -1 : it->second;
}

Grid rasterize(const Domain& d, double h) {
  if (h <= 0) throw std::invalid_argument("rasterize: h > 0 required");
  if (h > cheap_diameter_lower_bound(d) / 4)
    throw std::invalid_argument("rasterize: resolution too coarse");

  Grid g;
  g.h_ = h;
  g.domain_ = d;

  BBox bb;
  if (const auto* poly = d.as_polygon()) {
    bb = poly->bbox();
  } else if (const auto* e = d.as_ellipse()) {
    const double c = std::cos(e->rotation), s = std::sin(e->rotation);
    const double ex = std::hypot(e->a * c, e->b * s);
    const double ey = std::hypot(e->a * s, e->b * c);
    bb = {e->center.x() - ex, e->center.x() + ex, e->center.y() - ey,
          e->center.y() + ey};
  } else {
    const auto& rd = std::get<RoundedDomain>(d.shape);
    bb = rd.base.bbox();
    bb.xmin -= rd.epsilon;
    bb.xmax += rd.epsilon;
    bb.ymin -= rd.epsilon;
    bb.ymax += rd.epsilon;
  }
  const int ix0 = static_cast<int>(std::floor(bb.xmin / h)) - 1;
  const int ix1 = static_cast<int>(std::ceil(bb.xmax / h)) + 1;
  const int iy0 = static_cast<int>(std::floor(bb.ymin / h)) - 1;
  const int iy1 = static_cast<int>(std::ceil(bb.ymax / h)) + 1;

  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Point2 p(ix * h, iy * h);
      if (!contains(d, p)) continue;
      g.index_[key_of(ix, iy)] = static_cast<int>(g.nodes_.size());
      g.nodes_.push_back({ix, iy});
    }
  }
  if (g.nodes_.empty())
    throw std::runtime_error("rasterize: no interior nodes at this resolution");

  const int n = g.size();
  g.neighbors_.assign(n, {-1, -1, -1, -1});
  g.gaps_.assign(n, {h, h, h, h});
  const double gap_floor = 1e-6 * h;
  for (int k = 0; k < n; ++k) {
    const Point2 p = g.node_point(k);
    for (int dir = 0; dir < 4; ++dir) {
      const auto [dx, dy] = Grid::kDirs[dir];
      const Point2 dvec(dx, dy);
      const auto gap = boundary_gap(d, p, dvec, h);
      const int nb = g.index_of(g.nodes_[k].first + dx, g.nodes_[k].second + dy);
      if (!gap && nb >= 0) {
        g.neighbors_[k][dir] = nb;
      } else if (gap) {
        g.gaps_[k][dir] = std::max(*gap, gap_floor);
      } else {
        // neighbor lattice point is exterior yet no crossing was found
        // (tangency); treat the boundary as sitting at distance h
        g.gaps_[k][dir] = h;
      }
    }
  }

  // keep the largest 4-connected component
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = ncomp;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int dir = 0; dir < 4; ++dir) {
        const int v = g.neighbors_[u][dir];
        if (v >= 0 && comp[v] < 0) {
          comp[v] = ncomp;
          q.push(v);
        }
      }
    }
    ++ncomp;
  }
  if (ncomp > 1) {
    std::vector<int> count(ncomp, 0);
    for (int k = 0; k < n; ++k) ++count[comp[k]];
    const int keep =
        static_cast<int>(std::max_element(count.begin(), count.end()) -
                         count.begin());
    g.warning_ = "rasterize: dropped " +
                 std::to_string(n - count[keep]) +
                 " node(s) in smaller connected components";
    Grid g2;
    g2.h_ = h;
    g2.domain_ = d;
    std::vector<int> remap(n, -1);
    for (int k = 0; k < n; ++k) {
      if (comp[k] != keep) continue;
      remap[k] = static_cast<int>(g2.nodes_.size());
      g2.nodes_.push_back(g.nodes_[k]);
      g2.index_[key_of(g.nodes_[k].first, g.nodes_[k].second)] = remap[k];
    }
    g2.neighbors_.assign(g2.size(), {-1, -1, -1, -1});
    g2.gaps_.assign(g2.size(), {h, h, h, h});
    for (int k = 0; k < n; ++k) {
      if (remap[k] < 0) continue;
      for (int dir = 0; dir < 4; ++dir) {
        const int nb = g.neighbors_[k][dir];
        if (nb >= 0 && remap[nb] >= 0) {
          g2.neighbors_[remap[k]][dir] = remap[nb];
        } else if (nb >= 0) {
          g2.gaps_[remap[k]][dir] = h;  // dropped neighbor acts as boundary
        } else {
          g2.gaps_[remap[k]][dir] = g.gaps_[k][dir];
        }
      }
    }
    g2.warning_ = g.warning_;
    return g2;
  }
  return g;
}

double SparseOperator::symmetry_defect(int probes, unsigned seed) const {
  DetRng rng(seed);
  double worst = 0;
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd x(n()), y(n());
    for (int i = 0; i < n(); ++i) x[i] = rng.normal();
    for (int i = 0; i < n(); ++i) y[i] = rng.normal();
    const Eigen::VectorXd Ax = mat * x, Ay = mat * y;
    const double num = std::abs(x.dot(Ay) - y.dot(Ax));
    const double den = x.norm() * Ay.norm() + y.norm() * Ax.norm();
    worst = std::max(worst, num / den);
  }
  return worst;
}

bool SparseOperator::tridiagonal() const {
  for (int r = 0; r < mat.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, r);
         it; ++it) {
      if (std::abs(it.col() - r) > 1) return false;
    }
  }
  return true;
}

SparseOperator assemble_laplacian(const Grid& g) {
  const int n = g.size();
  const double h = g.h();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  for (int k = 0; k < n; ++k) {
    double diag = 0;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = g.neighbors(k)[dir];
      if (nb >= 0) {
        diag += 1.0 / (h * h);
        trip.emplace_back(k, nb, -1.0 / (h * h));
      } else {
        diag += 1.0 / (g.gaps(k)[dir] * h);
      }
    }
    trip.emplace_back(k, k, diag);
  }
  SparseOperator A;
  A.mat.resize(n, n);
  A.mat.setFromTriplets(trip.begin(), trip.end());
  A.mat.makeCompressed();
  return A;
}

SparseOperator assemble_divergence_form(const Grid& g,
                                        const CoefficientField& coeff) {
  const int n = g.size();
  const double h = g.h();
  // collect lattice cells touching at least one interior node
  struct CellKey {
    int ix, iy;
  };
  std::unordered_map<int64_t, CellKey> cells;
  auto ckey = [](int ix, int iy) {
    return (static_cast<int64_t>(ix) << 32) ^ static_cast<uint32_t>(iy);
  };
  for (int k = 0; k < n; ++k) {
    const auto [ix, iy] = g.node_coords(k);
    for (int dx = -1; dx <= 0; ++dx)
      for (int dy = -1; dy <= 0; ++dy)
        cells.insert({ckey(ix + dx, iy + dy), {ix + dx, iy + dy}});
  }

  auto check_elliptic = [&](const Eigen::Matrix2d& a) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    const double emin = (tr - disc) / 2, emax = (tr + disc) / 2;
    const double slack = 1e-9 * (1 + std::abs(emax));
    if (std::abs(a(0, 1) - a(1, 0)) > 1e-12 * (1 + std::abs(tr)) ||
        emin < 1.0 / coeff.Lambda - slack || emax > coeff.Lambda + slack)
      throw std::invalid_argument(
          "assemble_divergence_form: coefficient violates the declared "
          "ellipticity bound");
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * n);
  // P1 triangles on the SW-NE split of each cell; exterior nodes carry u=0.
  for (const auto& [key, c] : cells) {
    const Point2 sw(c.ix * h, c.iy * h);
    const std::array<Point2, 4> corner = {sw, sw + Point2(h, 0),
                                          sw + Point2(h, h), sw + Point2(0, h)};
    const std::array<int, 4> idx = {
        g.index_of(c.ix, c.iy), g.index_of(c.ix + 1, c.iy),
        g.index_of(c.ix + 1, c.iy + 1), g.index_of(c.ix, c.iy + 1)};
    const std::array<std::array<int, 3>, 2> tris = {{{0, 1, 2}, {0, 2, 3}}};
    for (const auto& t : tris) {
      const Point2 p0 = corner[t[0]], p1 = corner[t[1]], p2 = corner[t[2]];
      const Point2 centroid = (p0 + p1 + p2) / 3.0;
      const Eigen::Matrix2d a = coeff.a(centroid);
      check_elliptic(a);
      const double area = h * h / 2;
      // grad of the P1 basis: perpendicular of the opposite edge / (2 area)
      std::array<Point2, 3> grad;
      const std::array<Point2, 3> pts = {p0, p1, p2};
      for (int i = 0; i < 3; ++i) {
        const Point2 e = pts[(i + 2) % 3] - pts[(i + 1) % 3];
        grad[i] = Point2(-e.y(), e.x()) / (2 * area);
      }
      for (int i = 0; i < 3; ++i) {
        const int gi = idx[t[i]];
        if (gi < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int gj = idx[t[j]];
          if (gj < 0) continue;
          const double kij = area * grad[i].dot(a * grad[j]);
          trip.emplace_back(gi, gj, kij / (h * h));
        }
      }
    }
  }
  SparseOperator A;
  A.mat.resize(n, n);
  A.mat.setFromTriplets(trip.begin(), trip.end());
  A.mat.prune(1e-300);
  A.mat.makeCompressed();
  return A;
}

double integrate(const Grid& g, const GridField& f) {
  if (f.size() != g.size())
    throw std::invalid_argument("integrate: field does not match grid");
  return g.quad_weight() * f.sum();
}

SparseOperator assemble_interval_laplacian(int m, double L) {
  if (m < 1 || L <= 0)
    throw std::invalid_argument("interval laplacian: m >= 1, L > 0 required");
  const double h = L / (m + 1);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < m; ++i) {
    trip.emplace_back(i, i, 2.0 / (h * h));
    if (i + 1 < m) {
      trip.emplace_back(i, i + 1, -1.0 / (h * h));
      trip.emplace_back(i + 1, i, -1.0 / (h * h));
    }
  }
  SparseOperator A;
  A.mat.resize(m, m);
  A.mat.setFromTriplets(trip.begin(), trip.end());
  A.mat.makeCompressed();
  return A;
}

double lanczos_smallest_ritz(const SparseOperator& A, int steps,
                             unsigned seed) {
  const int n = A.n();
  steps = std::min(steps, n);
  DetRng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  v.normalize();
  Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd alpha(steps), beta(steps);
  double b = 0;
  int m = 0;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd w = A.apply(v) - b * v_prev;
    alpha[j] = v.dot(w);
    w -= alpha[j] * v;
    b = w.norm();
    beta[j] = b;
    m = j + 1;
    if (b < 1e-14) break;
    v_prev = v;
    v = w / b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return es.eigenvalues()(0);
}

}  // namespace specgeo
