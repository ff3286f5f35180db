#include "specgeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace specgeo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double cross2(const Point2& u, const Point2& v) {
  return u.x() * v.y() - u.y() * v.x();
}

double orient(const Point2& a, const Point2& b, const Point2& c) {
  return cross2(b - a, c - a);
}

// Interior angle at b of the corner a-b-c, measured on the left of a->b->c.
double interior_angle(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 u = a - b;
  const Point2 v = c - b;
  double ang = std::atan2(cross2(v, u), v.dot(u));
  if (ang < 0) ang += 2 * kPi;
  return ang;
}

struct Arc {
  Point2 center;
  double r = 0;
  double a0 = 0, a1 = 0;  // counterclockwise from a0 to a1, a1 > a0

  bool angle_in(double ang) const {
    double t = ang;
    while (t < a0) t += 2 * kPi;
    return t <= a1 + 1e-12;
  }
  double dist(const Point2& p) const {
    const Point2 u = p - center;
    const double nu = u.norm();
    if (nu < 1e-300) return r;
    if (angle_in(std::atan2(u.y(), u.x()))) return std::abs(nu - r);
    const Point2 e0 = center + r * Point2(std::cos(a0), std::sin(a0));
    const Point2 e1 = center + r * Point2(std::cos(a1), std::sin(a1));
    return std::min((p - e0).norm(), (p - e1).norm());
  }
};

std::optional<double> ray_segment_hit(const Point2& p, const Point2& d,
                                      const Segment& s, double tmax) {
  const Point2 e = s.b - s.a;
  const double det = d.x() * (-e.y()) - (-e.x()) * d.y();
  if (std::abs(det) < 1e-30) return std::nullopt;
  const Point2 r = s.a - p;
  const double t = (r.x() * (-e.y()) - (-e.x()) * r.y()) / det;
  const double u = (d.x() * r.y() - d.y() * r.x()) / det;
  if (u < -1e-12 || u > 1 + 1e-12) return std::nullopt;
  if (t <= 1e-12 || t > tmax + 1e-12) return std::nullopt;
  return std::min(t, tmax);
}

std::optional<double> ray_circle_hit(const Point2& p, const Point2& d,
                                     const Point2& c, double r, double tmax) {
  const Point2 w = p - c;
  const double A = d.squaredNorm();
  const double B = 2 * w.dot(d);
  const double C = w.squaredNorm() - r * r;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double best = kInf;
  for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
    if (t > 1e-12 && t <= tmax + 1e-12) best = std::min(best, t);
  }
  if (best == kInf) return std::nullopt;
  return std::min(best, tmax);
}

std::optional<double> ray_arc_hit(const Point2& p, const Point2& d,
                                  const Arc& arc, double tmax) {
  const Point2 w = p - arc.center;
  const double A = d.squaredNorm();
  const double B = 2 * w.dot(d);
  const double C = w.squaredNorm() - arc.r * arc.r;
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double best = kInf;
  for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}) {
    if (t <= 1e-12 || t > tmax + 1e-12) continue;
    const Point2 hit = p + t * d - arc.center;
    if (arc.angle_in(std::atan2(hit.y(), hit.x()))) best = std::min(best, t);
  }
  if (best == kInf) return std::nullopt;
  return best;
}

// Rounded-domain boundary features.
struct RoundedFeatures {
  std::vector<Segment> segs;
  std::vector<Arc> arcs;
};

RoundedFeatures rounded_features(const RoundedDomain& rd) {
  RoundedFeatures f;
  const auto& V = rd.base.vertices();
  const int n = static_cast<int>(V.size());
  const double eps = rd.epsilon;
  auto ang_of = [](const Point2& u) { return std::atan2(u.y(), u.x()); };
  if (rd.mode == RoundedMode::kEpsilonNeighborhood) {
    for (int i = 0; i < n; ++i) {
      const Point2 a = V[i], b = V[(i + 1) % n];
      Point2 t = (b - a).normalized();
      Point2 out(t.y(), -t.x());  // right of a CCW side is outward
      f.segs.push_back({a + eps * out, b + eps * out});
    }
    for (int i = 0; i < n; ++i) {
      const Point2 prev = V[(i + n - 1) % n], v = V[i], next = V[(i + 1) % n];
      Point2 t0 = (v - prev).normalized();
      Point2 t1 = (next - v).normalized();
      Point2 o0(t0.y(), -t0.x()), o1(t1.y(), -t1.x());
      double a0 = ang_of(o0), a1 = ang_of(o1);
      while (a1 < a0) a1 += 2 * kPi;
      f.arcs.push_back({v, eps, a0, a1});
    }
  } else {
    for (int i = 0; i < n; ++i) f.segs.push_back(rd.base.side(i));
    for (int i = 0; i < n; ++i) {
      const Point2 prev = V[(i + n - 1) % n], v = V[i], next = V[(i + 1) % n];
      Point2 u_in = (v - prev).normalized();   // extension of incoming side
      Point2 u_out = (v - next).normalized();  // extension of outgoing side
      f.segs.push_back({v, v + eps * u_out});
      f.segs.push_back({v, v + eps * u_in});
      double a0 = ang_of(u_out), a1 = ang_of(u_in);
      while (a1 < a0) a1 += 2 * kPi;
      f.arcs.push_back({v, eps, a0, a1});
    }
  }
  return f;
}

// Distance from a point to the closed convex polygon (0 when inside).
double dist_to_closed_polygon(const PolygonDomain& poly, const Point2& p) {
  if (contains(poly, p)) return 0.0;
  double d = kInf;
  for (const auto& s : poly.sides()) d = std::min(d, dist_point_segment(p, s));
  return d;
}

// In which corner wedge of a corner-rounded domain does p lie, if any.
int wedge_index(const RoundedDomain& rd, const Point2& p) {
  const auto& V = rd.base.vertices();
  const int n = static_cast<int>(V.size());
  for (int i = 0; i < n; ++i) {
    const Point2 u = p - V[i];
    const double nu = u.norm();
    if (nu >= rd.epsilon || nu < 1e-15) continue;
    const Point2 prev = V[(i + n - 1) % n], next = V[(i + 1) % n];
    Point2 u_in = (V[i] - prev).normalized();
    Point2 u_out = (V[i] - next).normalized();
    double a0 = std::atan2(u_out.y(), u_out.x());
    double a1 = std::atan2(u_in.y(), u_in.x());
    while (a1 < a0) a1 += 2 * kPi;
    double t = std::atan2(u.y(), u.x());
    while (t < a0) t += 2 * kPi;
    if (t > a0 + 1e-12 && t < a1 - 1e-12) return i;
  }
  return -1;
}

// --- ellipse helpers (canonical frame: center origin, axes aligned) ---

Point2 to_canonical(const EllipseDomain& e, const Point2& p) {
  const Point2 u = p - e.center;
  const double c = std::cos(e.rotation), s = std::sin(e.rotation);
  return Point2(c * u.x() + s * u.y(), -s * u.x() + c * u.y());
}

Point2 dir_to_canonical(const EllipseDomain& e, const Point2& d) {
  const double c = std::cos(e.rotation), s = std::sin(e.rotation);
  return Point2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
}

// Distance from a canonical-frame point to the ellipse curve.
double dist_point_ellipse(double a, double b, Point2 q) {
  double u = std::abs(q.x()), v = std::abs(q.y());
  if (u < 1e-14 && v < 1e-14) return b;
  if (v < 1e-14) {
    // nearest point may be off-axis inside the evolute
    const double t = u * a / (a * a - b * b + 1e-300);
    if (a > b && t < 1) {
      const double x = a * t;
      const double y = b * std::sqrt(std::max(0.0, 1 - t * t));
      return std::hypot(x - u, y);
    }
    return std::abs(a - u);
  }
  if (u < 1e-14) return std::abs(b - v);
  // root of f(t) = (a u/(t+a^2))^2 + (b v/(t+b^2))^2 - 1, t in (-b^2, inf)
  auto f = [&](double t) {
    const double xa = a * u / (t + a * a);
    const double yb = b * v / (t + b * b);
    return xa * xa + yb * yb - 1;
  };
  double lo = -b * b + 1e-14 * b * b + 1e-300;
  double hi = std::max(a * u, b * v);  // f(hi) < 0 guaranteed for this choice
  while (f(hi) > 0) hi = 2 * hi + 1;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
    if (hi - lo < 1e-16 * (std::abs(hi) + a * a)) break;
  }
  const double t = 0.5 * (lo + hi);
  const double x = a * a * u / (t + a * a);
  const double y = b * b * v / (t + b * b);
  return std::hypot(x - u, y - v);
}

// --- generic feature distance (boundary of any shape, unchecked) ---

double feature_dist(const DomainShape& shape, const Point2& p) {
  if (const auto* poly = std::get_if<PolygonDomain>(&shape)) {
    double d = kInf;
    for (const auto& s : poly->sides()) d = std::min(d, dist_point_segment(p, s));
    return d;
  }
  if (const auto* e = std::get_if<EllipseDomain>(&shape)) {
    return dist_point_ellipse(e->a, e->b, to_canonical(*e, p));
  }
  const auto& rd = std::get<RoundedDomain>(shape);
  const auto f = rounded_features(rd);
  double d = kInf;
  for (const auto& s : f.segs) d = std::min(d, dist_point_segment(p, s));
  for (const auto& a : f.arcs) d = std::min(d, a.dist(p));
  return d;
}

double shape_scale(const DomainShape& shape) {
  if (const auto* poly = std::get_if<PolygonDomain>(&shape))
    return poly->bbox().diag();
  if (const auto* e = std::get_if<EllipseDomain>(&shape)) return 2 * e->a;
  const auto& rd = std::get<RoundedDomain>(shape);
  return rd.base.bbox().diag() + 2 * rd.epsilon;
}

BBox shape_bbox(const DomainShape& shape) {
  if (const auto* poly = std::get_if<PolygonDomain>(&shape))
    return poly->bbox();
  if (const auto* e = std::get_if<EllipseDomain>(&shape)) {
    const double c = std::cos(e->rotation), s = std::sin(e->rotation);
    const double ex = std::hypot(e->a * c, e->b * s);
    const double ey = std::hypot(e->a * s, e->b * c);
    return {e->center.x() - ex, e->center.x() + ex, e->center.y() - ey,
            e->center.y() + ey};
  }
  const auto& rd = std::get<RoundedDomain>(shape);
  BBox bb = rd.base.bbox();
  bb.xmin -= rd.epsilon;
  bb.xmax += rd.epsilon;
  bb.ymin -= rd.epsilon;
  bb.ymax += rd.epsilon;
  return bb;
}

// --- visibility machinery for polygons ---

bool point_in_closed_polygon(const PolygonDomain& poly, const Point2& p,
                             double tol) {
  double d = kInf;
  for (const auto& s : poly.sides()) d = std::min(d, dist_point_segment(p, s));
  if (d <= tol) {
    // on the outer boundary or a slit: in the closure unless on a slit only
    return true;
  }
  return contains(poly, p);
}

bool segment_inside_polygon(const PolygonDomain& poly, const Point2& p,
                            const Point2& q) {
  const double tol = 1e-12 * (1 + poly.bbox().diag());
  const Segment s{p, q};
  for (const auto& e : poly.sides()) {
    if (segments_cross_properly(s, e, tol)) return false;
  }
  for (double t : {0.5, 0.25, 0.75}) {
    if (!point_in_closed_polygon(poly, p + t * (q - p), tol)) return false;
  }
  return true;
}

struct VisGraph {
  std::vector<Point2> nodes;
  std::vector<std::vector<std::pair<int, double>>> adj;
};

VisGraph build_visibility_graph(const PolygonDomain& poly,
                                const std::vector<Point2>& extra) {
  VisGraph g;
  g.nodes = poly.reflex_points();
  g.nodes.insert(g.nodes.end(), extra.begin(), extra.end());
  const int n = static_cast<int>(g.nodes.size());
  g.adj.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (segment_inside_polygon(poly, g.nodes[i], g.nodes[j])) {
        const double w = (g.nodes[i] - g.nodes[j]).norm();
        g.adj[i].push_back({j, w});
        g.adj[j].push_back({i, w});
      }
    }
  }
  return g;
}

std::vector<double> dijkstra(const VisGraph& g, int src) {
  std::vector<double> dist(g.nodes.size(), kInf);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u] + 1e-15) continue;
    for (auto [v, w] : g.adj[u]) {
      if (dist[u] + w < dist[v] - 1e-15) {
        dist[v] = dist[u] + w;
        pq.push({dist[v], v});
      }
    }
  }
  return dist;
}

double polygon_geodesic(const PolygonDomain& poly, const Point2& p,
                        const Point2& q) {
  if ((p - q).norm() < 1e-15) return 0.0;
  if (poly.convex() && !poly.has_slits()) return (p - q).norm();
  if (segment_inside_polygon(poly, p, q)) return (p - q).norm();
  VisGraph g = build_visibility_graph(poly, {p, q});
  const int ip = static_cast<int>(g.nodes.size()) - 2;
  const int iq = ip + 1;
  const auto dist = dijkstra(g, ip);
  if (dist[iq] == kInf)
    throw std::runtime_error("geodesic_dist: points are not connected");
  return dist[iq];
}

const PolygonDomain& require_polygon(const Domain& d, const char* op) {
  const auto* poly = d.as_polygon();
  if (!poly)
    throw std::invalid_argument(std::string(op) + ": polygon domain required");
  return *poly;
}

}  // namespace

// ---------------------------------------------------------------------------
// segment utilities
// ---------------------------------------------------------------------------

double dist_point_segment(const Point2& p, const Segment& s) {
  return (p - closest_point_segment(p, s)).norm();
}

Point2 closest_point_segment(const Point2& p, const Segment& s) {
  const Point2 e = s.b - s.a;
  const double L2 = e.squaredNorm();
  if (L2 < 1e-300) return s.a;
  const double t = std::clamp((p - s.a).dot(e) / L2, 0.0, 1.0);
  return s.a + t * e;
}

bool segments_cross_properly(const Segment& s, const Segment& t, double tol) {
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  const double t2 = tol * tol;
  return ((d1 > t2 && d2 < -t2) || (d1 < -t2 && d2 > t2)) &&
         ((d3 > t2 && d4 < -t2) || (d3 < -t2 && d4 > t2));
}

// ---------------------------------------------------------------------------
// PolygonDomain
// ---------------------------------------------------------------------------

PolygonDomain::PolygonDomain(std::vector<Point2> vertices,
                             std::vector<Segment> slits)
    : vertices_(std::move(vertices)), slits_(std::move(slits)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  double sa = 0;
  for (int i = 0; i < n; ++i)
    sa += cross2(vertices_[i], vertices_[(i + 1) % n]);
  sa *= 0.5;
  bbox_.xmin = bbox_.xmax = vertices_[0].x();
  bbox_.ymin = bbox_.ymax = vertices_[0].y();
  for (const auto& v : vertices_) {
    bbox_.xmin = std::min(bbox_.xmin, v.x());
    bbox_.xmax = std::max(bbox_.xmax, v.x());
    bbox_.ymin = std::min(bbox_.ymin, v.y());
    bbox_.ymax = std::max(bbox_.ymax, v.y());
  }
  const double bb_area =
      (bbox_.xmax - bbox_.xmin) * (bbox_.ymax - bbox_.ymin);
  if (std::abs(sa) < 1e-12 * std::max(bb_area, 1e-300))
    throw std::invalid_argument("degenerate polygon: area below tolerance");
  if (sa < 0) {  // normalize to counterclockwise
    std::reverse(vertices_.begin(), vertices_.end());
    sa = -sa;
  }
  area_ = sa;

  for (int i = 0; i < n; ++i) {
    sides_.push_back({vertices_[i], vertices_[(i + 1) % n]});
    if (sides_.back().length() < 1e-14 * (1 + bbox_.diag()))
      throw std::invalid_argument("polygon side has zero length");
  }
  convex_ = true;
  for (int i = 0; i < n; ++i) {
    const double ang = interior_angle(vertices_[(i + n - 1) % n], vertices_[i],
                                      vertices_[(i + 1) % n]);
    angles_.push_back(ang);
    if (ang > kPi + 1e-12) {
      convex_ = false;
      reflex_.push_back(vertices_[i]);
    }
  }
  for (const auto& sl : slits_) {
    if (sl.length() < 1e-14 * (1 + bbox_.diag()))
      throw std::invalid_argument("slit has zero length");
    sides_.push_back(sl);
    sides_.push_back(sl);
    // free tips are turning points of the glued metric; endpoints attached
    // to the outer boundary are not (each bank sees a convex corner there)
    const double tol = 1e-9 * (1 + bbox_.diag());
    for (const Point2& tip : {sl.a, sl.b}) {
      double db = kInf;
      for (int i = 0; i < n; ++i) db = std::min(db, dist_point_segment(tip, sides_[i]));
      if (db > tol) reflex_.push_back(tip);
    }
    convex_ = false;
  }
}

const Segment& PolygonDomain::side(int id) const {
  if (id < 0 || id >= side_count())
    throw std::invalid_argument("invalid side id");
  return sides_[id];
}

double PolygonDomain::perimeter() const {
  double s = 0;
  for (int i = 0; i < vertex_count(); ++i) s += sides_[i].length();
  return s;
}

double PolygonDomain::vertex_diameter() const {
  double d = 0;
  for (size_t i = 0; i < vertices_.size(); ++i)
    for (size_t j = i + 1; j < vertices_.size(); ++j)
      d = std::max(d, (vertices_[i] - vertices_[j]).norm());
  return d;
}

// ---------------------------------------------------------------------------
// Ellipse / rounded constructors
// ---------------------------------------------------------------------------

EllipseDomain::EllipseDomain(Point2 c, double semi_a, double semi_b, double rot)
    : center(std::move(c)), a(semi_a), b(semi_b), rotation(rot) {
  if (!(a >= b && b > 0))
    throw std::invalid_argument("ellipse requires a >= b > 0");
}

RoundedDomain::RoundedDomain(PolygonDomain base_poly, RoundedMode m, double eps)
    : base(std::move(base_poly)), mode(m), epsilon(eps) {
  if (eps <= 0) throw std::invalid_argument("rounded domain needs epsilon > 0");
  if (!base.convex() || base.has_slits())
    throw std::invalid_argument("rounded domain requires a convex base");
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

PolygonDomain build_triangle(const Point2& v1, const Point2& v2,
                             const Point2& v3) {
  const double a2 = std::abs(orient(v1, v2, v3));
  double scale = std::max({(v2 - v1).norm(), (v3 - v1).norm(), 1e-300});
  if (a2 < 1e-12 * scale * scale)
    throw std::invalid_argument("degenerate triangle: collinear vertices");
  return PolygonDomain({v1, v2, v3});
}

PolygonDomain build_rectangle(const Point2& corner, double w, double h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("rectangle needs w,h > 0");
  return PolygonDomain({corner, corner + Point2(w, 0), corner + Point2(w, h),
                        corner + Point2(0, h)});
}

PolygonDomain build_regular_polygon(int n, double l, const Point2& center) {
  if (n < 3) throw std::invalid_argument("regular polygon needs n >= 3");
  if (l <= 0) throw std::invalid_argument("regular polygon needs l > 0");
  const double R = l / (2 * std::sin(kPi / n));
  std::vector<Point2> v;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * kPi * k / n;
    v.push_back(center + R * Point2(std::cos(t), std::sin(t)));
  }
  return PolygonDomain(std::move(v));
}

Eigen::Vector4d PerturbedTriangle::bump_distances(const Point2& p) const {
  return {dist_point_segment(p, seg_a1c1), dist_point_segment(p, seg_c1c3),
          dist_point_segment(p, seg_c2c3), dist_point_segment(p, seg_c2a2)};
}

PerturbedTriangle build_perturbed_triangle(const PolygonDomain& T, double p,
                                           double eps) {
  if (T.vertex_count() != 3 || T.has_slits())
    throw std::invalid_argument("perturbed triangle requires a triangle base");
  // locate A1 = origin, A2 on the positive x-axis, apex above
  const auto& V = T.vertices();
  int i1 = -1, i2 = -1, i3 = -1;
  for (int i = 0; i < 3; ++i) {
    if (V[i].norm() < 1e-12) i1 = i;
  }
  for (int i = 0; i < 3; ++i) {
    if (i == i1) continue;
    if (std::abs(V[i].y()) < 1e-12 && V[i].x() > 0) i2 = i;
  }
  i3 = 3 - i1 - i2;
  if (i1 < 0 || i2 < 0 || V[i3].y() <= 0)
    throw std::invalid_argument(
        "perturbed triangle: base side A1A2 must lie on the positive x-axis "
        "with A1 at the origin and the apex above");
  const Point2 A1 = V[i1], A2 = V[i2], A3 = V[i3];
  const double l = A2.x();
  if (!(eps > 0 && eps < l / 2))
    throw std::invalid_argument("perturbed triangle: eps out of (0, l/2)");
  if (!(p > eps && p < l - eps))
    throw std::invalid_argument("perturbed triangle: p out of (eps, l-eps)");

  const double s3 = std::sqrt(3.0) / 2;
  const Point2 C1(p - eps / 2, 0.0);
  const Point2 C2(p + eps / 2, 0.0);
  const Point2 C3(p, -eps * s3);  // bump hangs outside T
  PerturbedTriangle out{
      PolygonDomain({A1, C1, C3, C2, A2, A3}),
      T,
      eps,
      Point2(p, eps),
      Point2(p, -eps * s3 / 3),
      {A1, C1},
      {C1, C3},
      {C2, C3},
      {C2, A2}};
  if (!contains(T, out.x_eps))
    throw std::invalid_argument(
        "perturbed triangle: distinguished point (p, eps) is not interior");
  return out;
}

PolygonDomain build_sawtooth_side(const PolygonDomain& T, int side_id,
                                  int count, double height) {
  if (T.has_slits())
    throw std::invalid_argument("sawtooth: slit-free polygon required");
  if (side_id < 0 || side_id >= T.vertex_count())
    throw std::invalid_argument("sawtooth: invalid side id");
  if (count < 1) throw std::invalid_argument("sawtooth: count >= 1 required");
  if (height < 0) throw std::invalid_argument("sawtooth: height >= 0 required");
  if (height == 0) return T;
  double min_side = kInf;
  for (int i = 0; i < T.vertex_count(); ++i)
    min_side = std::min(min_side, T.side(i).length());
  if (height >= 0.5 * min_side)
    throw std::runtime_error("sawtooth: bump height too large for this shape");

  const Segment s = T.side(side_id);
  const Point2 t = (s.b - s.a).normalized();
  const Point2 out(t.y(), -t.x());  // outward of a CCW polygon
  std::vector<Point2> v;
  for (int i = 0; i < T.vertex_count(); ++i) {
    v.push_back(T.vertices()[i]);
    if (i == side_id) {
      const Point2 step = (s.b - s.a) / count;
      for (int k = 0; k < count; ++k) {
        v.push_back(s.a + (k + 0.5) * step + height * out);
        if (k + 1 < count) v.push_back(s.a + double(k + 1) * step);
      }
    }
  }
  PolygonDomain result(std::move(v));
  const double tol = 1e-12 * (1 + result.bbox().diag());
  const auto& sides = result.sides();
  for (size_t i = 0; i < sides.size(); ++i)
    for (size_t j = i + 2; j < sides.size(); ++j) {
      if (i == 0 && j + 1 == sides.size()) continue;
      if (segments_cross_properly(sides[i], sides[j], tol))
        throw std::runtime_error("sawtooth: bumps collide with other sides");
    }
  return result;
}

Domain dilate(const Domain& d, double c, const Point2& center) {
  if (c < 1) throw std::invalid_argument("dilate: factor c >= 1 required");
  const double tol = 1e-9 * (1 + shape_scale(d.shape));
  if (!contains(d, center) &&
      feature_dist(d.shape, center) > tol)
    throw std::invalid_argument("dilate: center must lie in the closure");
  auto map = [&](const Point2& p) { return center + c * (p - center); };
  Domain out = d;
  if (const auto* poly = d.as_polygon()) {
    std::vector<Point2> v;
    for (const auto& p : poly->vertices()) v.push_back(map(p));
    std::vector<Segment> slits;
    for (const auto& s : poly->slits()) slits.push_back({map(s.a), map(s.b)});
    out.shape = PolygonDomain(std::move(v), std::move(slits));
  } else if (const auto* e = d.as_ellipse()) {
    out.shape = EllipseDomain(map(e->center), c * e->a, c * e->b, e->rotation);
  } else {
    const auto& rd = std::get<RoundedDomain>(d.shape);
    std::vector<Point2> v;
    for (const auto& p : rd.base.vertices()) v.push_back(map(p));
    out.shape =
        RoundedDomain(PolygonDomain(std::move(v)), rd.mode, c * rd.epsilon);
  }
  return out;
}

Domain DilationFamily::at(double c) const { return dilate(base, c, center); }

// ---------------------------------------------------------------------------
// Membership and boundary distance
// ---------------------------------------------------------------------------

bool contains(const PolygonDomain& d, const Point2& p) {
  const auto& bb = d.bbox();
  if (p.x() <= bb.xmin || p.x() >= bb.xmax || p.y() <= bb.ymin ||
      p.y() >= bb.ymax)
    return false;
  const double tol = 1e-12 * (1 + bb.diag());
  double dmin = kInf;
  for (const auto& s : d.sides()) {
    dmin = std::min(dmin, dist_point_segment(p, s));
    if (dmin <= tol) return false;
  }
  bool inside = false;
  const int n = d.vertex_count();
  for (int i = 0; i < n; ++i) {
    const Point2& a = d.vertices()[i];
    const Point2& b = d.vertices()[(i + 1) % n];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xx =
          a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xx) inside = !inside;
    }
  }
  return inside;
}

bool contains(const EllipseDomain& d, const Point2& p) {
  const Point2 q = to_canonical(d, p);
  const double v = (q.x() / d.a) * (q.x() / d.a) +
                   (q.y() / d.b) * (q.y() / d.b);
  return v < 1 - 1e-14;
}

bool contains(const RoundedDomain& d, const Point2& p) {
  if (d.mode == RoundedMode::kEpsilonNeighborhood) {
    return dist_to_closed_polygon(d.base, p) < d.epsilon * (1 - 1e-14);
  }
  if (contains(d.base, p)) return true;
  return wedge_index(d, p) >= 0;
}

bool contains(const Domain& d, const Point2& p) {
  return std::visit([&](const auto& s) { return contains(s, p); }, d.shape);
}

double dist_boundary_unchecked(const Domain& d, const Point2& p) {
  if (const auto* rd = d.as_rounded()) {
    // exact signed-offset expressions where available
    if (rd->mode == RoundedMode::kEpsilonNeighborhood) {
      const double db = dist_to_closed_polygon(rd->base, p);
      if (db > 0) return std::abs(rd->epsilon - db);
      double inner = kInf;
      for (const auto& s : rd->base.sides())
        inner = std::min(inner, dist_point_segment(p, s));
      return rd->epsilon + inner;
    }
    const int w = wedge_index(*rd, p);
    if (w >= 0) {
      const auto& V = rd->base.vertices();
      const int n = rd->base.vertex_count();
      const Point2 v = V[w];
      const Point2 prev = V[(w + n - 1) % n], next = V[(w + 1) % n];
      const Point2 u_in = (v - prev).normalized();
      const Point2 u_out = (v - next).normalized();
      const double d1 =
          dist_point_segment(p, {v, v + rd->epsilon * u_in});
      const double d2 =
          dist_point_segment(p, {v, v + rd->epsilon * u_out});
      return std::min({d1, d2, rd->epsilon - (p - v).norm()});
    }
  }
  return feature_dist(d.shape, p);
}

double dist_boundary(const Domain& d, const Point2& p) {
  if (!contains(d, p))
    throw std::invalid_argument("dist_boundary: point is not interior");
  return dist_boundary_unchecked(d, p);
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

bool segment_inside(const Domain& d, const Point2& p, const Point2& q) {
  if (const auto* poly = d.as_polygon())
    return segment_inside_polygon(*poly, p, q);
  if (d.as_ellipse()) return true;  // convex
  const auto& rd = std::get<RoundedDomain>(d.shape);
  if (rd.mode == RoundedMode::kEpsilonNeighborhood) return true;  // convex
  // corner mode: sample densely (only used in diagnostics)
  for (int k = 0; k <= 16; ++k) {
    const Point2 m = p + (k / 16.0) * (q - p);
    if (!contains(rd, m) && dist_boundary_unchecked(Domain(rd), m) > 1e-12)
      return false;
  }
  return true;
}

double geodesic_dist(const Domain& d, const Point2& p, const Point2& q) {
  if (!contains(d, p) || !contains(d, q))
    throw std::invalid_argument("geodesic_dist: both points must be interior");
  if (const auto* poly = d.as_polygon()) return polygon_geodesic(*poly, p, q);
  if (d.as_ellipse()) return (p - q).norm();
  const auto& rd = std::get<RoundedDomain>(d.shape);
  if (rd.mode == RoundedMode::kEpsilonNeighborhood) return (p - q).norm();
  // corner wedges attach to the convex base only at the pinch vertices
  const int wp = wedge_index(rd, p), wq = wedge_index(rd, q);
  const auto& V = rd.base.vertices();
  if (wp < 0 && wq < 0) return (p - q).norm();
  if (wp >= 0 && wq >= 0) {
    if (wp == wq) return (p - q).norm();
    return (p - V[wp]).norm() + (V[wp] - V[wq]).norm() + (V[wq] - q).norm();
  }
  const int w = wp >= 0 ? wp : wq;
  const Point2& inb = wp >= 0 ? q : p;
  const Point2& inw = wp >= 0 ? p : q;
  return (inw - V[w]).norm() + (V[w] - inb).norm();
}

double dist_side(const Domain& d, int side_id, const Point2& p,
                 SideMetric metric) {
  const auto& poly = require_polygon(d, "dist_side");
  if (!contains(poly, p))
    throw std::invalid_argument("dist_side: point is not interior");
  const Segment seg = poly.side(side_id);
  if (metric == SideMetric::kEuclidean || (poly.convex() && !poly.has_slits()))
    return dist_point_segment(p, seg);
  // geodesic: direct drop if visible, else route over the visibility graph,
  // dropping perpendicular from the last turning corner. A contact point
  // sitting on a slit is ambiguous (the slit has two banks), so contacts are
  // nudged off slits and the crossing test then sorts out the bank.
  const double nudge = 1e-8 * seg.length();
  auto same_segment = [&](const Segment& a, const Segment& b) {
    return ((a.a - b.a).norm() < nudge && (a.b - b.b).norm() < nudge) ||
           ((a.a - b.b).norm() < nudge && (a.b - b.a).norm() < nudge);
  };
  auto on_slit = [&](const Point2& q) {
    for (const auto& sl : poly.slits()) {
      if (same_segment(sl, seg)) continue;  // the slit itself is the target
      if (dist_point_segment(q, sl) < 10 * nudge) return true;
    }
    return false;
  };
  auto drop = [&](const Point2& v) -> double {
    const Point2 e = (seg.b - seg.a).normalized();
    std::vector<Point2> contacts{closest_point_segment(v, seg)};
    if (on_slit(contacts[0])) {
      contacts.push_back(contacts[0] + 20 * nudge * e);
      contacts.push_back(contacts[0] - 20 * nudge * e);
      contacts.erase(contacts.begin());
    }
    double best = kInf;
    for (const auto& c : contacts) {
      if (dist_point_segment(c, seg) > nudge) continue;  // left the side
      if (on_slit(c)) continue;
      if (segment_inside_polygon(poly, v, c))
        best = std::min(best, (v - c).norm());
    }
    return best;
  };
  double best = drop(p);
  VisGraph g = build_visibility_graph(poly, {p});
  const int ip = static_cast<int>(g.nodes.size()) - 1;
  const auto dist = dijkstra(g, ip);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (dist[i] == kInf) continue;
    best = std::min(best, dist[i] + drop(g.nodes[i]));
  }
  if (best == kInf)
    throw std::runtime_error("dist_side: side unreachable");
  return best;
}

double inner_diameter(const Domain& d) {
  if (const auto* e = d.as_ellipse()) return 2 * e->a;
  if (const auto* rd = d.as_rounded())
    return rd->base.vertex_diameter() + 2 * rd->epsilon;
  const auto& poly = *d.as_polygon();
  if (poly.convex() && !poly.has_slits()) return poly.vertex_diameter();

  // dense boundary sampling, one refinement pass around the best pair
  const double de = poly.vertex_diameter();
  auto sample_boundary = [&](double spacing) {
    std::vector<Point2> pts;
    for (int i = 0; i < poly.vertex_count(); ++i) {
      const Segment& s = poly.side(i);
      const int m = std::max(1, static_cast<int>(std::ceil(s.length() / spacing)));
      for (int k = 0; k < m; ++k)
        pts.push_back(s.a + (double(k) / m) * (s.b - s.a));
    }
    for (const auto& s : poly.slits()) {
      const int m = std::max(1, static_cast<int>(std::ceil(s.length() / spacing)));
      for (int k = 0; k <= m; ++k)
        pts.push_back(s.a + (double(k) / m) * (s.b - s.a));
    }
    return pts;
  };
  auto all_pairs_max = [&](const std::vector<Point2>& pts, Point2* bp,
                           Point2* bq) {
    const auto& reflex = poly.reflex_points();
    const int r = static_cast<int>(reflex.size());
    const int m = static_cast<int>(pts.size());
    // reflex-to-reflex shortest paths
    Eigen::MatrixXd D(r, r);
    D.setConstant(kInf);
    for (int i = 0; i < r; ++i) D(i, i) = 0;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        if (segment_inside_polygon(poly, reflex[i], reflex[j]))
          D(i, j) = D(j, i) = (reflex[i] - reflex[j]).norm();
    for (int k = 0; k < r; ++k)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          D(i, j) = std::min(D(i, j), D(i, k) + D(k, j));
    // sample-to-reflex visibility
    Eigen::MatrixXd S(m, r);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < r; ++j)
        S(i, j) = segment_inside_polygon(poly, pts[i], reflex[j])
                      ? (pts[i] - reflex[j]).norm()
                      : kInf;
    Eigen::MatrixXd SR = S;  // min over paths into the reflex graph
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < r; ++j) {
        double best = kInf;
        for (int k = 0; k < r; ++k) best = std::min(best, S(i, k) + D(k, j));
        SR(i, j) = best;
      }
    double diam = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        double dd = segment_inside_polygon(poly, pts[i], pts[j])
                        ? (pts[i] - pts[j]).norm()
                        : kInf;
        for (int k = 0; k < r; ++k) dd = std::min(dd, SR(i, k) + S(j, k));
        if (dd != kInf && dd > diam) {
          diam = dd;
          *bp = pts[i];
          *bq = pts[j];
        }
      }
    }
    return diam;
  };
  Point2 bp, bq;
  std::vector<Point2> pts = sample_boundary(de / 512);
  double diam = all_pairs_max(pts, &bp, &bq);
  // refine near the maximizing pair
  std::vector<Point2> fine;
  for (const auto& c : {bp, bq}) {
    for (const auto& p : sample_boundary(de / 2048)) {
      if ((p - c).norm() < 2 * de / 512) fine.push_back(p);
    }
  }
  if (fine.size() >= 2) {
    Point2 fp, fq;
    diam = std::max(diam, all_pairs_max(fine, &fp, &fq));
  }
  return diam;
}

// ---------------------------------------------------------------------------
// Area, tubes, eccentricity, exterior balls
// ---------------------------------------------------------------------------

double area(const Domain& d) {
  if (const auto* poly = d.as_polygon()) return poly->area();
  if (const auto* e = d.as_ellipse()) return kPi * e->a * e->b;
  const auto& rd = std::get<RoundedDomain>(d.shape);
  const double base = rd.base.area();
  const double eps = rd.epsilon;
  if (rd.mode == RoundedMode::kCornerQuarterCircles) {
    double wedges = 0;
    for (double a : rd.base.vertex_angles()) wedges += (kPi - a) * eps * eps / 2;
    return base + wedges;
  }
  return base + rd.base.perimeter() * eps + kPi * eps * eps;
}

std::optional<double> boundary_gap(const Domain& d, const Point2& p,
                                   const Point2& dir, double tmax) {
  double best = kInf;
  if (const auto* poly = d.as_polygon()) {
    for (const auto& s : poly->sides()) {
      if (auto t = ray_segment_hit(p, dir, s, tmax)) best = std::min(best, *t);
    }
  } else if (const auto* e = d.as_ellipse()) {
    // canonical frame quadratic
    const Point2 q = to_canonical(*e, p);
    const Point2 cd = dir_to_canonical(*e, dir);
    const Point2 qs(q.x() / e->a, q.y() / e->b);
    const Point2 ds(cd.x() / e->a, cd.y() / e->b);
    const double A = ds.squaredNorm();
    const double B = 2 * qs.dot(ds);
    const double C = qs.squaredNorm() - 1;
    const double disc = B * B - 4 * A * C;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
        if (t > 1e-12 && t <= tmax + 1e-12) best = std::min(best, t);
    }
  } else {
    const auto f = rounded_features(std::get<RoundedDomain>(d.shape));
    for (const auto& s : f.segs)
      if (auto t = ray_segment_hit(p, dir, s, tmax)) best = std::min(best, *t);
    for (const auto& a : f.arcs)
      if (auto t = ray_arc_hit(p, dir, a, tmax)) best = std::min(best, *t);
  }
  if (best == kInf) return std::nullopt;
  return std::min(best, tmax);
}

TubeRatio tube_ratio(const Domain& d, double delta) {
  if (delta < 0 || delta > 1)
    throw std::invalid_argument("tube_ratio: delta in [0,1] required");
  const double diam = inner_diameter(d);
  const BBox bb = shape_bbox(d.shape);
  const double spacing = diam / 1024;
  long interior = 0, near = 0;
  for (double y = bb.ymin + spacing / 2; y < bb.ymax; y += spacing) {
    for (double x = bb.xmin + spacing / 2; x < bb.xmax; x += spacing) {
      const Point2 p(x, y);
      if (!contains(d, p)) continue;
      ++interior;
      if (dist_boundary_unchecked(d, p) <= delta * diam) ++near;
    }
  }
  if (interior == 0) throw std::runtime_error("tube_ratio: empty interior");
  if (delta == 0) return {0.0, spacing};
  return {static_cast<double>(near) / interior, spacing};
}

bool is_convex(const Domain& d) {
  if (const auto* poly = d.as_polygon())
    return poly->convex() && !poly->has_slits();
  if (d.as_ellipse()) return true;
  const auto& rd = std::get<RoundedDomain>(d.shape);
  return rd.mode == RoundedMode::kEpsilonNeighborhood;
}

Eccentricity eccentricity(const Domain& d) {
  if (!is_convex(d))
    throw std::invalid_argument("eccentricity: convex domain required");
  Eccentricity out;
  if (const auto* e = d.as_ellipse()) {
    out.center = e->center;
    out.a = e->b;
    out.A = e->a;
    out.K = e->a / e->b;
    return out;
  }
  // Chebyshev center by grid search plus compass refinement; ties (e.g. the
  // center segment of a rectangle) are averaged before refinement.
  const BBox bb = shape_bbox(d.shape);
  const int N = 192;
  const double sx = (bb.xmax - bb.xmin) / N;
  const double sy = (bb.ymax - bb.ymin) / N;
  double best = -1;
  std::vector<Point2> ties;
  for (int j = 0; j <= N; ++j) {
    for (int i = 0; i <= N; ++i) {
      const Point2 p(bb.xmin + i * sx, bb.ymin + j * sy);
      if (!contains(d, p)) continue;
      const double r = dist_boundary_unchecked(d, p);
      if (r > best + 1e-12) {
        best = r;
        ties.assign(1, p);
      } else if (r > best - 0.25 * std::min(sx, sy)) {
        ties.push_back(p);
      }
    }
  }
  if (ties.empty()) throw std::runtime_error("eccentricity: empty interior");
  Point2 c = Point2::Zero();
  for (const auto& p : ties) c += p;
  c /= static_cast<double>(ties.size());
  if (!contains(d, c)) c = ties[ties.size() / 2];
  double step = std::max(sx, sy);
  double rc = dist_boundary_unchecked(d, c);
  while (step > 1e-10 * (1 + bb.diag())) {
    bool moved = false;
    for (int k = 0; k < 8; ++k) {
      const double t = 2 * kPi * k / 8;
      const Point2 q = c + step * Point2(std::cos(t), std::sin(t));
      if (!contains(d, q)) continue;
      const double rq = dist_boundary_unchecked(d, q);
      if (rq > rc + 1e-15) {
        c = q;
        rc = rq;
        moved = true;
      }
    }
    if (!moved) step /= 2;
  }
  out.center = c;
  out.a = rc;
  double A = 0;
  if (const auto* poly = d.as_polygon()) {
    for (const auto& v : poly->vertices()) A = std::max(A, (v - c).norm());
  } else {
    const auto& rd = std::get<RoundedDomain>(d.shape);
    for (const auto& v : rd.base.vertices())
      A = std::max(A, (v - c).norm() + rd.epsilon);
  }
  out.A = A;
  out.K = A / rc;
  return out;
}

std::vector<TubeBoundCheck> convex_tube_bound_check(
    const Domain& d, const std::vector<double>& deltas) {
  if (!is_convex(d))
    throw std::invalid_argument("convex_tube_bound_check: convex required");
  const Eccentricity ecc = eccentricity(d);
  std::vector<TubeBoundCheck> out;
  for (double delta : deltas) {
    TubeBoundCheck c;
    c.delta = delta;
    if (delta >= ecc.a / (2 * ecc.A)) continue;  // bound needs delta < a/(2A)
    const TubeRatio tr = tube_ratio(d, delta);
    c.tube = tr.value;
    const double base = 1 - (2 * ecc.A / ecc.a) * delta;
    c.bound = 1 - base * base;
    c.margin = c.bound - c.tube;
    // the bound is an equality for balls; allow for quadrature error there
    const double slack = 4 * tr.grid_spacing / inner_diameter(d);
    c.holds = c.tube <= c.bound + slack;
    out.push_back(c);
  }
  return out;
}

double exterior_ball_alpha(const Domain& d,
                           const std::vector<Point2>& samples) {
  double alpha = kInf;
  const double scale = shape_scale(d.shape);
  auto dist_to_closure = [&](const Point2& c) -> double {
    if (contains(d, c)) return 0.0;
    return dist_boundary_unchecked(d, c);
  };
  for (const auto& x : samples) {
    const double dx = dist_boundary(d, x);
    // candidate directions: outward normal at the nearest boundary point,
    // plus exterior bisectors at nearby polygon vertices
    std::vector<std::pair<Point2, Point2>> anchors;  // (anchor, unit dir)
    {
      // nearest feature foot by sampling directions then polishing
      Point2 foot = x;
      double bestd = kInf;
      if (const auto* poly = d.as_polygon()) {
        for (const auto& s : poly->sides()) {
          const Point2 f = closest_point_segment(x, s);
          const double dd = (f - x).norm();
          if (dd < bestd) {
            bestd = dd;
            foot = f;
          }
        }
        for (const auto& v : poly->vertices()) {
          if ((v - x).norm() <= 2 * dx + 1e-12)
            anchors.push_back({v, (v - x).normalized()});
        }
        for (const auto& s : poly->slits()) {
          for (const Point2& tip : {s.a, s.b}) {
            if ((tip - x).norm() <= 2 * dx + 1e-12) {
              Point2 n(- (s.b - s.a).y(), (s.b - s.a).x());
              n.normalize();
              anchors.push_back({tip, n});
              anchors.push_back({tip, -n});
              anchors.push_back({tip, (tip - x).normalized()});
            }
          }
        }
      } else {
        double db = kInf, best_t = 0;
        for (int k = 0; k < 720; ++k) {
          const double t = 2 * kPi * k / 720;
          const Point2 dir(std::cos(t), std::sin(t));
          if (auto g = boundary_gap(d, x, dir, 4 * dx)) {
            if (*g < db) {
              db = *g;
              best_t = t;
            }
          }
        }
        // polish the direction so the anchor is the true nearest foot
        double lo = best_t - 2 * kPi / 720, hi = best_t + 2 * kPi / 720;
        auto gap_at = [&](double t) {
          const Point2 dir(std::cos(t), std::sin(t));
          const auto g = boundary_gap(d, x, dir, 4 * dx);
          return g ? *g : kInf;
        };
        for (int it = 0; it < 60; ++it) {
          const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
          if (gap_at(m1) < gap_at(m2))
            hi = m2;
          else
            lo = m1;
        }
        best_t = 0.5 * (lo + hi);
        db = gap_at(best_t);
        foot = x + db * Point2(std::cos(best_t), std::sin(best_t));
      }
      anchors.push_back({foot, (foot - x).normalized()});
    }
    double lo = 0, hi = dx;
    const double tol = 1e-4 * dx;
    auto feasible = [&](double r) {
      for (const auto& [anchor, dir] : anchors) {
        for (double stretch : {1.0, 1.2, 1.5, 2.0}) {
          const Point2 c = anchor + (r * stretch) * dir;
          if ((c - x).norm() + r > 2 * dx + 1e-9 * scale) continue;
          if (dist_to_closure(c) >= r * (1 - 1e-6)) return true;
        }
      }
      return false;
    };
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    alpha = std::min(alpha, lo / dx);
  }
  return alpha;
}

}  // namespace specgeo
