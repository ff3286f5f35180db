#include "specgeo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include "specgeo/rng.hpp"
#include <stdexcept>

namespace specgeo {
namespace {

Eigen::VectorXd thomas_solve(const SparseOperator& A, const Eigen::VectorXd& b) {
  const int n = A.n();
  Eigen::VectorXd dl(n), dd(n), du(n);
  dl.setZero();
  dd.setZero();
  du.setZero();
  for (int r = 0; r < n; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A.mat,
                                                                        r);
         it; ++it) {
      if (it.col() == r) dd[r] = it.value();
      else if (it.col() == r - 1) dl[r] = it.value();
      else if (it.col() == r + 1) du[r] = it.value();
    }
  }
  Eigen::VectorXd c(n), d(n);
  c[0] = du[0] / dd[0];
  d[0] = b[0] / dd[0];
  for (int i = 1; i < n; ++i) {
    const double m = dd[i] - dl[i] * c[i - 1];
    c[i] = (i + 1 < n) ? du[i] / m : 0;
    d[i] = (b[i] - dl[i] * d[i - 1]) / m;
  }
  Eigen::VectorXd x(n);
  x[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace

Eigen::VectorXd cg_solve(const SparseOperator& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& x0, double rel_tol) {
  if (A.tridiagonal()) return thomas_solve(A, b);
  const int n = A.n();
  const int cap = static_cast<int>(10 * std::sqrt(static_cast<double>(n))) + 10;
  const Eigen::VectorXd invdiag = A.diagonal().cwiseInverse();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = b - A.apply(x);
  const double bnorm = b.norm();
  if (bnorm == 0) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = invdiag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < cap; ++it) {
    if (r.norm() <= rel_tol * bnorm) return x;
    const Eigen::VectorXd Ap = A.apply(p);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = invdiag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (r.norm() <= rel_tol * bnorm) return x;
  throw std::runtime_error(
      "cg_solve: no convergence within " + std::to_string(cap) +
      " iterations (relative residual " + std::to_string(r.norm() / bnorm) +
      ")");
}

Spectrum smallest_eigenpairs(const SparseOperator& A, double quad_weight,
                             int k, const EigenSolveOptions& opts) {
  const int n = A.n();
  if (k < 1) throw std::invalid_argument("smallest_eigenpairs: k >= 1");
  if (k > n / 4)
    throw std::invalid_argument("smallest_eigenpairs: k must be <= n/4");

  const int buffer = k == 1 ? 2 : 4;
  const int m = std::min(k + buffer, std::max(k, n / 4));
  DetRng rng(opts.seed);
  Eigen::MatrixXd V(n, m);
  V.col(0).setOnes();  // positive start feeds the Perron eigenvector
  for (int j = 1; j < m; ++j)
    for (int i = 0; i < n; ++i) V(i, j) = rng.normal();
  // orthonormalize start block
  for (int j = 0; j < m; ++j) {
    for (int rep = 0; rep < 2; ++rep)
      for (int i = 0; i < j; ++i) V.col(j) -= V.col(i).dot(V.col(j)) * V.col(i);
    V.col(j).normalize();
  }

  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd ritz_prev = Eigen::VectorXd::Constant(m, -1.0);
  Eigen::VectorXd resid = Eigen::VectorXd::Constant(m, 1.0);
  int locked = 0;
  bool done = false;

  for (int sweep = 0; sweep < opts.max_outer && !done; ++sweep) {
    // inverse power step on the active columns; the inner solves track the
    // outer residual (inexact inverse iteration) down to the pinned cg_tol
    for (int j = locked; j < m; ++j) {
      Eigen::VectorXd x0 = (ritz[j] > 0) ? (V.col(j) / ritz[j]).eval()
                                         : Eigen::VectorXd::Zero(n);
      const double inner_tol =
          sweep == 0 ? opts.cg_tol
                     : std::clamp(0.03 * resid[j], opts.cg_tol, 1e-4);
      V.col(j) = cg_solve(A, V.col(j), x0, inner_tol);
    }
    // Gram-Schmidt against locked and earlier active columns (twice)
    for (int j = locked; j < m; ++j) {
      for (int rep = 0; rep < 2; ++rep)
        for (int i = 0; i < j; ++i)
          V.col(j) -= V.col(i).dot(V.col(j)) * V.col(i);
      const double nn = V.col(j).norm();
      if (nn < 1e-300)
        throw std::runtime_error("smallest_eigenpairs: block collapsed");
      V.col(j) /= nn;
    }
    // Rayleigh-Ritz on the active block
    const int a = m - locked;
    Eigen::MatrixXd AVa(n, a);
    for (int j = 0; j < a; ++j) AVa.col(j) = A.apply(V.col(locked + j));
    Eigen::MatrixXd H = V.middleCols(locked, a).transpose() * AVa;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    V.middleCols(locked, a) = (V.middleCols(locked, a) * es.eigenvectors()).eval();
    AVa = (AVa * es.eigenvectors()).eval();
    for (int j = 0; j < a; ++j) {
      ritz[locked + j] = es.eigenvalues()(j);
      resid[locked + j] =
          (AVa.col(j) - ritz[locked + j] * V.col(locked + j)).norm() /
          std::max(ritz[locked + j], 1e-300);
    }
    // lock converged leading pairs in order
    while (locked < k) {
      const int j = locked;
      const bool conv = std::abs(ritz[j] - ritz_prev[j]) <=
                            opts.tol * std::max(ritz[j], 1e-300) &&
                        resid[j] <= opts.tol;
      if (!conv) break;
      ++locked;
    }
    ritz_prev = ritz;
    done = locked >= k;
  }
  if (!done)
    throw std::runtime_error(
        "smallest_eigenpairs: no convergence within the outer iteration cap");

  Spectrum out;
  out.quad_weight = quad_weight;
  out.tol = opts.tol;
  out.eigenvalues.resize(k);
  out.residuals.resize(k);
  const double scale = 1.0 / std::sqrt(quad_weight);
  for (int j = 0; j < k; ++j) {
    out.eigenvalues[j] = ritz[j];
    out.residuals[j] = resid[j];
    Eigen::VectorXd v = V.col(j) * scale;
    if (j == 0) {
      if (v.sum() < 0) v = -v;
    } else {
      const double thresh = 1e-12 * v.cwiseAbs().maxCoeff();
      for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > thresh) {
          if (v[i] < 0) v = -v;
          break;
        }
      }
    }
    out.phi.push_back(std::move(v));
  }
  if (k >= 2 &&
      out.eigenvalues[1] - out.eigenvalues[0] < 1e-8 * out.eigenvalues[0])
    out.degeneracy_warning = true;
  return out;
}

Spectrum smallest_eigenpairs(const SparseOperator& A, const Grid& g, int k,
                             const EigenSolveOptions& opts) {
  if (A.n() != g.size())
    throw std::invalid_argument("smallest_eigenpairs: operator/grid mismatch");
  return smallest_eigenpairs(A, g.quad_weight(), k, opts);
}

double rayleigh_quotient(const SparseOperator& A, const Eigen::VectorXd& f) {
  const double ff = f.squaredNorm();
  if (ff == 0)
    throw std::invalid_argument("rayleigh_quotient: zero field");
  return f.dot(A.apply(f)) / ff;
}

std::vector<MonotonicityRow> eigen_monotonicity_check(const Spectrum& spec_U,
                                                      const Spectrum& spec_V,
                                                      double tol) {
  const int k = std::min(spec_U.k(), spec_V.k());
  std::vector<MonotonicityRow> rows;
  for (int j = 0; j < k; ++j) {
    MonotonicityRow r;
    r.k = j + 1;
    r.lambda_inner = spec_U.eigenvalues[j];
    r.lambda_outer = spec_V.eigenvalues[j];
    r.ok = r.lambda_inner >= r.lambda_outer * (1 - tol) - tol;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace specgeo
