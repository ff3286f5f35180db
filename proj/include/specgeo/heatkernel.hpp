// Spectral Dirichlet heat kernels with truncation diagnostics, intrinsic
// ultracontractivity ratios, phi^2-weighted geodesic ball volumes, two-sided
// Gaussian envelope fitting, and disk Green functions.
#pragma once

#include <functional>
#include <vector>

#include "specgeo/analysis.hpp"
#include "specgeo/grid.hpp"
#include "specgeo/spectral.hpp"

namespace specgeo {

struct KernelEval {
  double value = 0;
  double tail = 0;  // e^{-lambda_K t}
  double t = 0;
  int K = 0;
  bool below_recommended_t = false;  // t < 0.1 / lambda_1
};

// Truncated expansion sum_{j<=K} e^{-lambda_j t} phi_j(x) phi_j(y) at nodes
// x, y. Throws below the hard floor t >= 0.1 / lambda_K.
KernelEval dirichlet_kernel(const Spectrum& spec, double t, int node_x,
                            int node_y, int K);

struct KernelMonotonicityReport {
  int pairs = 0;
  int violations = 0;       // beyond the truncation tolerance
  double max_violation = 0; // max of p_U - p_V - tol over pairs
  double tol = 0;
};

// p_U(t,x,y) <= p_V(t,x,y) + truncation tolerance at the sampled node pairs
// of the inner grid (U subset of V declared by the caller; common lattice).
KernelMonotonicityReport kernel_monotonicity_check(
    const Spectrum& spec_U, const Grid& grid_U, const Spectrum& spec_V,
    const Grid& grid_V, double t, const std::vector<std::pair<int, int>>& pairs,
    int K);

// p_K(t,x,y) / (e^{-lambda_1 t} phi_1(x) phi_1(y)).
double iu_ratio(const Spectrum& spec, double t, int node_x, int node_y, int K);

struct IuRatio {
  double value = 0;
  bool below_t_floor = false;  // t < C * diam^2
};

// iu_ratio with the recommended time floor t >= C * diam^2 flagged.
IuRatio iu_ratio_checked(const Spectrum& spec, double t, int node_x,
                         int node_y, int K, double diam, double C = 0.5);

// Shortest-path distances on the grid with a 16-neighbor stencil whose hops
// are verified to stay inside the domain (metrication error < ~1%).
class GridGeodesic {
 public:
  explicit GridGeodesic(const Grid& g);
  Eigen::VectorXd distances_from(int source) const;
  const Grid& grid() const { return *grid_; }

 private:
  const Grid* grid_;
  std::vector<std::vector<std::pair<int, float>>> adj_;
};

// h^2 sum of phi_1^2 over nodes within geodesic distance r of the source.
double phi2_ball_volume(const Spectrum& spec, const Eigen::VectorXd& geo_dist,
                        double r);

struct EnvelopeSample {
  double t = 0;
  int node_x = -1;
  int node_y = -1;
};

struct EnvelopeFit {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  bool ok = false;
  int worst_sample = -1;  // index of the sample binding c3 (or failing)
  double c1_over_c3 = 0;
};

struct EnvelopeOptions {
  int K = 20;
  bool geodesic_distance = true;  // Gaussian factor distance (else Euclidean)
  std::vector<double> c_grid = {2, 4, 8, 16, 32, 64};
};

// Fit of p <= c1 F exp(-d^2/(c2 t)) and p >= c3 F exp(-d^2/(c4 t)) with
// F = phi(x)phi(y)/sqrt(V(x,sqrt t) V(y,sqrt t)): c2 is the smallest grid
// value whose minimal c1 is within 4x of the best achievable, c4 the largest
// grid value whose maximal c3 stays within 4x of the best and positive.
EnvelopeFit kernel_envelope_fit(const Spectrum& spec, const Grid& g,
                               const std::vector<EnvelopeSample>& samples,
                               const EnvelopeOptions& opts = {});

enum class GreenMode { kInterior, kExterior };

// Dirichlet Green function of the planar disk B(0,eps) (or its complement):
// -(1/2pi) log|x-y| + (1/2pi) log(|x| |y-x*| / eps), x* = eps^2 x / |x|^2,
// with the radial limit -(1/2pi) log(|y|/eps) at x = 0.
double green_disk(double eps, const Point2& x, const Point2& y, GreenMode mode);

// n >= 3 branch of the ball Green function, as a pure formula evaluator.
double green_ball_formula(int n, double eps, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y);

struct GreenLinearReport {
  double ratio_min = 0;  // of G eps^{n-1} / rho over the samples
  double ratio_max = 0;
  int samples = 0;
};

// Linear boundary decay of the disk Green function: pole at 0 (interior
// mode) or 2 eps e_2 (exterior), samples restricted to rho <= 3 eps / 4.
GreenLinearReport green_linear_check(double eps, GreenMode mode,
                                     const std::vector<Point2>& ys);

}  // namespace specgeo
