// Smallest Dirichlet eigenpairs of an assembled operator by inverse power
// iteration with conjugate-gradient inner solves, run on a small block with
// Rayleigh-Ritz rotation so that numerically split symmetric pairs converge;
// converged pairs are locked and deflated by explicit orthogonalization.
#pragma once

#include <Eigen/Dense>

#include "specgeo/grid.hpp"

namespace specgeo {

struct Spectrum {
  Eigen::VectorXd eigenvalues;            // ascending
  std::vector<Eigen::VectorXd> phi;       // quad-normalized eigenfields
  Eigen::VectorXd residuals;              // |A phi - lambda phi| / lambda
  double quad_weight = 0;                 // h^2 (2-D grid) or h (1-D)
  double tol = 0;
  bool degeneracy_warning = false;        // lambda_2 - lambda_1 < 1e-8 lambda_1
  int k() const { return static_cast<int>(phi.size()); }
};

struct EigenSolveOptions {
  double tol = 1e-8;        // relative eigenvalue tolerance
  double cg_tol = 1e-10;    // relative CG residual tolerance
  int max_outer = 500;
  unsigned seed = 12345;    // deterministic start vectors
};

// k smallest eigenpairs of the SPD operator A. Eigenfields are normalized so
// quad_weight * sum(phi^2) = 1; phi_1 is positive, higher modes have their
// first nonzero entry positive.
Spectrum smallest_eigenpairs(const SparseOperator& A, double quad_weight,
                             int k, const EigenSolveOptions& opts = {});

// Grid flavor (quad weight h^2).
Spectrum smallest_eigenpairs(const SparseOperator& A, const Grid& g, int k,
                             const EigenSolveOptions& opts = {});

// (f'Af)/(f'f); lower-bounded by lambda_1 up to solver tolerance.
double rayleigh_quotient(const SparseOperator& A, const Eigen::VectorXd& f);

struct MonotonicityRow {
  int k = 0;
  double lambda_inner = 0;  // domain U (subset)
  double lambda_outer = 0;  // domain V (superset)
  bool ok = false;
};

// Checks lambda_k(U) >= lambda_k(V) - tol for all computed k, U subset of V
// declared by the caller.
std::vector<MonotonicityRow> eigen_monotonicity_check(const Spectrum& spec_U,
                                                      const Spectrum& spec_V,
                                                      double tol = 1e-6);

// Jacobi-preconditioned CG (direct Thomas solve for tridiagonal operators).
// Iteration cap 10*sqrt(n); throws on non-convergence with diagnostics.
Eigen::VectorXd cg_solve(const SparseOperator& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& x0, double rel_tol);

}  // namespace specgeo
