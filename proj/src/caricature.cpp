#include "specgeo/caricature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace specgeo {
namespace {

constexpr double kPi = std::numbers::pi;

bool in_closure(const PolygonDomain& P, const Point2& p, double* bdist) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : P.sides()) d = std::min(d, dist_point_segment(p, s));
  *bdist = d;
  const double tol = 1e-10 * (1 + P.bbox().diag());
  return contains(P, p) || d <= tol;
}

}  // namespace

double phi_interval(double a, double x) {
  if (!(a > 0) || !(x > 0) || !(x < a))
    throw std::invalid_argument("phi_interval: need 0 < x < a");
  return 2 * std::sqrt(2.0) * std::pow(a, -1.5) * std::min(x, a - x);
}

double phi_triangle(const PolygonDomain& T, const Point2& p) {
  if (T.vertex_count() != 3 || T.has_slits())
    throw std::invalid_argument("phi_triangle: triangle required");
  double bdist;
  if (!in_closure(T, p, &bdist))
    throw std::invalid_argument("phi_triangle: exterior point");
  // d_i = distance to the side opposite vertex i = side (i+1) mod 3
  double d[3], alpha[3];
  for (int i = 0; i < 3; ++i) {
    d[i] = dist_point_segment(p, T.side((i + 1) % 3));
    alpha[i] = T.angle_at_vertex(i);
  }
  double diam = 0;
  for (int i = 0; i < 3; ++i) diam = std::max(diam, T.side(i).length());
  const double num = d[0] * d[1] * d[2] *
                     std::pow(d[0] + d[2], kPi / alpha[1] - 2) *
                     std::pow(d[1] + d[2], kPi / alpha[0] - 2) *
                     std::pow(d[0] + d[1], kPi / alpha[2] - 2);
  const double expo = kPi / alpha[0] + kPi / alpha[1] + kPi / alpha[2] - 2;
  return num / std::pow(diam, expo);
}

double perturbed_triangle_near_factor(const PerturbedTriangle& U,
                                      const Point2& p) {
  const Eigen::Vector4d d = U.bump_distances(p);
  const double e = U.eps;
  const double num = d[0] * d[1] * d[2] * d[3] * (d[1] + d[2]) *
                     std::pow(d[0] + d[1] + e, 1.25) *
                     std::pow(d[2] + d[3] + e, 1.25);
  const double den = (d[0] + e) * (d[1] + e) * (d[2] + e) * (d[3] + e) *
                     (d[1] + d[2] + e) * std::pow(d[0] + d[1], 1.25) *
                     std::pow(d[2] + d[3], 1.25);
  return num / den;
}

double phi_perturbed_triangle(const PerturbedTriangle& U,
                              const std::function<double(const Point2&)>& phi_T,
                              double phiT_at_xeps, const Point2& p) {
  double bdist;
  if (!in_closure(U.polygon, p, &bdist))
    throw std::invalid_argument("phi_perturbed_triangle: exterior point");
  const double rball = (p - U.bump_ball_center).norm();
  if (rball <= 2 * U.eps)
    return perturbed_triangle_near_factor(U, p) * phiT_at_xeps;
  return phi_T(p);
}

double phi_perturbed_triangle(const PerturbedTriangle& U,
                              const std::function<double(const Point2&)>& phi_T,
                              const Point2& p) {
  return phi_perturbed_triangle(U, phi_T, phi_T(U.x_eps), p);
}

double phi_polygon(const PolygonDomain& P, double r, const Point2& p) {
  if (!(r > 0)) throw std::invalid_argument("phi_polygon: scale r > 0");
  double bdist;
  if (!in_closure(P, p, &bdist))
    throw std::invalid_argument("phi_polygon: exterior point");
  const int N = P.side_count();
  const Domain dom(P);
  std::vector<double> d(N);
  const bool easy = P.convex() && !P.has_slits();
  for (int i = 0; i < N; ++i) {
    d[i] = easy || bdist <= 1e-12
               ? dist_point_segment(p, P.side(i))
               : dist_side(dom, i, p, SideMetric::kGeodesic);
  }
  // interior angles between consecutive sides: for the boundary sides of a
  // slit-free polygon, side i meets side i+1 at vertex i+1
  double value = 1, esum = 0;
  for (int i = 0; i < N; ++i) value *= d[i];
  const int nv = P.vertex_count();
  for (int i = 0; i < N; ++i) {
    double alpha;
    if (i + 1 < nv || (i + 1 == nv && !P.has_slits())) {
      alpha = P.angle_at_vertex((i + 1) % nv);
    } else {
      alpha = 2 * kPi;  // slit sides rounding the tip
    }
    value *= std::pow(d[i] + d[(i + 1) % N], kPi / alpha - 2);
    esum += kPi / alpha;
  }
  return value / std::pow(r, esum - N + 1);
}

PolygonAssumptions check_polygon_assumptions(const PolygonDomain& P,
                                             double side_ratio_cap,
                                             double angle_floor) {
  PolygonAssumptions out;
  double smin = std::numeric_limits<double>::infinity(), smax = 0;
  for (const auto& s : P.sides()) {
    smin = std::min(smin, s.length());
    smax = std::max(smax, s.length());
  }
  out.side_ratio = smax / smin;
  out.min_angle = 2 * kPi;
  for (double a : P.vertex_angles()) out.min_angle = std::min(out.min_angle, a);
  out.ok = out.side_ratio <= side_ratio_cap && out.min_angle > angle_floor;
  return out;
}

double phi_regular_polygon(const PolygonDomain& P, const Point2& p) {
  const int n = P.vertex_count();
  if (P.has_slits() || !P.convex())
    throw std::invalid_argument("phi_regular_polygon: regular polygon required");
  const double l = P.side(0).length();
  double bdist;
  if (!in_closure(P, p, &bdist))
    throw std::invalid_argument("phi_regular_polygon: exterior point");
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = dist_point_segment(p, P.side(i));
  double min_prod = std::numeric_limits<double>::infinity();
  double min_sum = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    min_prod = std::min(min_prod, d[i] * d[(i + 1) % n]);
    min_sum = std::min(min_sum, d[i] + d[(i + 1) % n]);
  }
  const double q = static_cast<double>(n) / (n - 2);
  return min_prod * std::pow(min_sum, q - 2) / std::pow(n * l, q + 1);
}

double phi_ellipse(const EllipseDomain& E, const Point2& p) {
  const Domain dom(E);
  const double rho = contains(E, p) ? dist_boundary(dom, p) : 0.0;
  const double diam = 2 * E.a;
  return rho / (diam * diam);
}

double phi_rounded_square(double l, double eps, const Point2& p) {
  if (!(l > 0)) throw std::invalid_argument("phi_rounded_square: l > 0");
  if (!(eps > 0 && eps <= l * std::sqrt(2.0) + 1e-12))
    throw std::invalid_argument("phi_rounded_square: eps in (0, l*sqrt(2)]");
  const double ax = std::abs(p.x()), ay = std::abs(p.y());
  double rho;
  if (ax <= l && ay <= l) {
    rho = std::min(l - ax, l - ay);
  } else if (ax > l && ay > l) {
    const double a = ax - l, b = ay - l;
    const double rr = std::hypot(a, b);
    if (rr >= eps)
      throw std::invalid_argument("phi_rounded_square: exterior point");
    rho = std::min({a, b, eps - rr});
  } else {
    throw std::invalid_argument("phi_rounded_square: exterior point");
  }
  const double c = l - eps / std::sqrt(2.0);
  const double xe = std::clamp(p.x(), -c, c);
  const double ye = std::clamp(p.y(), -c, c);
  const double phiV =
      (1.0 / l) * std::cos(kPi * xe / (2 * l)) * std::cos(kPi * ye / (2 * l));
  return rho / (rho + eps) * phiV;
}

double phi_rounded_triangle(const PolygonDomain& T, double eps,
                            const std::function<double(const Point2&)>& phi_T,
                            const Point2& p) {
  if (T.vertex_count() != 3 || T.has_slits())
    throw std::invalid_argument("phi_rounded_triangle: triangle required");
  if (!(eps > 0))
    throw std::invalid_argument("phi_rounded_triangle: eps > 0 required");
  // inner triangle: vertices pulled in by eps along the angle bisectors
  std::vector<Point2> inner;
  for (int i = 0; i < 3; ++i) {
    const Point2 v = T.vertices()[i];
    const Point2 a = T.vertices()[(i + 2) % 3];
    const Point2 b = T.vertices()[(i + 1) % 3];
    const Point2 bis = ((a - v).normalized() + (b - v).normalized()).normalized();
    inner.push_back(v + eps * bis);
  }
  const double area2 = (inner[1] - inner[0]).x() * (inner[2] - inner[0]).y() -
                       (inner[1] - inner[0]).y() * (inner[2] - inner[0]).x();
  if (area2 <= 1e-12 * T.bbox().diag() * T.bbox().diag())
    throw std::invalid_argument(
        "phi_rounded_triangle: eps too large, inner triangle degenerates");
  PolygonDomain Teps(inner);
  // rho in the eps-neighborhood of T
  double dT = std::numeric_limits<double>::infinity();
  for (const auto& s : T.sides()) dT = std::min(dT, dist_point_segment(p, s));
  double rho;
  if (contains(T, p)) {
    rho = eps + dT;
  } else {
    if (dT > eps * (1 + 1e-12))
      throw std::invalid_argument("phi_rounded_triangle: exterior point");
    rho = std::max(eps - dT, 0.0);
  }
  Point2 xe = p;
  if (!contains(Teps, p)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : Teps.sides()) {
      const Point2 q = closest_point_segment(p, s);
      const double dd = (q - p).norm();
      if (dd < best) {
        best = dd;
        xe = q;
      }
    }
  }
  return rho / (rho + eps) * phi_T(xe);
}

double phi_rounded_triangle(const PolygonDomain& T, double eps,
                            const Point2& p) {
  return phi_rounded_triangle(
      T, eps, [&](const Point2& q) { return phi_triangle(T, q); }, p);
}

}  // namespace specgeo
