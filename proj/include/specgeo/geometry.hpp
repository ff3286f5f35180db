// Planar domain representations and geometric queries: polygons (optionally
// slit), ellipses, rounded convex shapes, homothetic dilation families.
// Distances use the geodesic (in-domain) metric where the boundary is not
// convex; slits count as boundary with both sides glued.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace specgeo {

using Point2 = Eigen::Vector2d;

struct Segment {
  Point2 a, b;
  double length() const { return (b - a).norm(); }
};

// Distance from p to the closed segment.
double dist_point_segment(const Point2& p, const Segment& s);

// Closest point of the closed segment to p.
Point2 closest_point_segment(const Point2& p, const Segment& s);

// True if the open interiors of the two segments cross transversally.
// Shared endpoints, endpoint-on-segment touching and collinear overlap do
// not count as proper crossings.
bool segments_cross_properly(const Segment& s, const Segment& t, double tol);

struct BBox {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  double diag() const { return std::hypot(xmax - xmin, ymax - ymin); }
};

// ---------------------------------------------------------------------------
// Polygon with optional slits
// ---------------------------------------------------------------------------

// Simple polygon, vertices counterclockwise. Slits are zero-width open
// segments excluded from the interior; their endpoints enter the geodesic
// visibility graph and the interior angle at a free slit tip is 2*pi.
class PolygonDomain {
 public:
  explicit PolygonDomain(std::vector<Point2> vertices,
                         std::vector<Segment> slits = {});

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Segment>& slits() const { return slits_; }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  // Boundary sides followed by two sides per slit (the segment listed twice,
  // matching the glued-boundary count of the slit polygon).
  int side_count() const { return static_cast<int>(sides_.size()); }
  const Segment& side(int id) const;
  const std::vector<Segment>& sides() const { return sides_; }

  // Interior angle at vertex i (between the sides meeting there).
  double angle_at_vertex(int i) const { return angles_[i]; }
  const std::vector<double>& vertex_angles() const { return angles_; }

  bool convex() const { return convex_; }
  bool has_slits() const { return !slits_.empty(); }
  double area() const { return area_; }
  double perimeter() const;
  const BBox& bbox() const { return bbox_; }
  // Largest pairwise vertex distance (equals the inner diameter when convex).
  double vertex_diameter() const;

  // Vertices with interior angle > pi plus slit endpoints; these are the
  // interior corners a geodesic can turn around.
  const std::vector<Point2>& reflex_points() const { return reflex_; }

 private:
  std::vector<Point2> vertices_;
  std::vector<Segment> slits_;
  std::vector<Segment> sides_;
  std::vector<double> angles_;
  std::vector<Point2> reflex_;
  BBox bbox_;
  double area_ = 0;
  bool convex_ = false;
};

// ---------------------------------------------------------------------------
// Ellipse
// ---------------------------------------------------------------------------

struct EllipseDomain {
  Point2 center = Point2::Zero();
  double a = 1;         // semi-major
  double b = 1;         // semi-minor
  double rotation = 0;  // radians, major axis direction

  EllipseDomain() = default;
  EllipseDomain(Point2 c, double semi_a, double semi_b, double rot = 0);
};

// ---------------------------------------------------------------------------
// Rounded convex shapes
// ---------------------------------------------------------------------------

enum class RoundedMode {
  // Base polygon plus, at each vertex, the circular wedge of radius epsilon
  // spanning the exterior angle between the two side extensions. Area is
  // exactly base + sum_i (pi - alpha_i) eps^2 / 2.
  kCornerQuarterCircles,
  // Open epsilon-neighborhood of the base; boundary is the offset curve
  // (C^{1,1} for convex bases).
  kEpsilonNeighborhood,
};

struct RoundedDomain {
  PolygonDomain base;
  RoundedMode mode = RoundedMode::kEpsilonNeighborhood;
  double epsilon = 0;

  RoundedDomain(PolygonDomain base_poly, RoundedMode m, double eps);
};

// ---------------------------------------------------------------------------
// Tagged domain
// ---------------------------------------------------------------------------

using DomainShape = std::variant<PolygonDomain, EllipseDomain, RoundedDomain>;

// User annotations carried as labels only; never computed here.
struct InnerUniformityLabels {
  std::optional<double> C0;
  std::optional<double> c0;
};

struct Domain {
  DomainShape shape;
  InnerUniformityLabels labels;

  Domain(PolygonDomain p) : shape(std::move(p)) {}
  Domain(EllipseDomain e) : shape(std::move(e)) {}
  Domain(RoundedDomain r) : shape(std::move(r)) {}

  const PolygonDomain* as_polygon() const {
    return std::get_if<PolygonDomain>(&shape);
  }
  const EllipseDomain* as_ellipse() const {
    return std::get_if<EllipseDomain>(&shape);
  }
  const RoundedDomain* as_rounded() const {
    return std::get_if<RoundedDomain>(&shape);
  }
};

// One-parameter homothetic family V_c with planar growth maps
// f(c) = c^2 (volume) and g(c) = c (diameter).
struct DilationFamily {
  Domain base;
  Point2 center;

  static double growth_volume(double c) { return c * c; }
  static double growth_diameter(double c) { return c; }
  Domain at(double c) const;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

// Triangle through three non-collinear points, reordered counterclockwise.
// angle_at_vertex(i) is the angle opposite side (v_{i+1}, v_{i+2}).
PolygonDomain build_triangle(const Point2& v1, const Point2& v2,
                             const Point2& v3);

// Axis-aligned rectangle [x0,x0+w] x [y0,y0+h].
PolygonDomain build_rectangle(const Point2& corner, double w, double h);

// Regular n-gon with side length l, sides labeled counterclockwise,
// first vertex at angle 0 from the center.
PolygonDomain build_regular_polygon(int n, double l, const Point2& center);

// Triangle T with side A1A2 on the positive x-axis (A1 at the origin, apex
// above) perturbed by an outward equilateral bump of side eps attached at
// base midpoint p: C1=(p-eps/2,0), C2=(p+eps/2,0), apex C3=(p,-eps*sqrt3/2).
struct PerturbedTriangle {
  PolygonDomain polygon;       // A1, C1, C3, C2, A2, A3 (counterclockwise)
  PolygonDomain unperturbed;   // the original triangle T
  double eps = 0;
  Point2 x_eps;                // distinguished interior point (p, eps)
  Point2 bump_ball_center;     // centroid of the bump triangle
  Segment seg_a1c1, seg_c1c3, seg_c2c3, seg_c2a2;  // carriers of d_1..d_4
  // Distances d_1..d_4 of the perturbation profile at p.
  Eigen::Vector4d bump_distances(const Point2& p) const;
};

PerturbedTriangle build_perturbed_triangle(const PolygonDomain& T, double p,
                                           double eps);

// Replace side side_id by `count` identical outward isosceles bumps of the
// given height. height == 0 returns the polygon unchanged.
PolygonDomain build_sawtooth_side(const PolygonDomain& T, int side_id,
                                  int count, double height);

// Homothety by factor c >= 1 about `center` (must lie in the closure).
Domain dilate(const Domain& d, double c, const Point2& center);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

// Strict interior membership; boundary points and slit points are exterior.
bool contains(const Domain& d, const Point2& p);
bool contains(const PolygonDomain& d, const Point2& p);
bool contains(const EllipseDomain& d, const Point2& p);
bool contains(const RoundedDomain& d, const Point2& p);

// Euclidean distance from an interior point to the boundary (slits included).
double dist_boundary(const Domain& d, const Point2& p);

// Distance to the boundary without the interiority precondition; returns the
// unsigned distance to the nearest boundary feature for any point.
double dist_boundary_unchecked(const Domain& d, const Point2& p);

enum class SideMetric { kEuclidean, kGeodesic };

// Distance from interior p to side `side_id` of a polygon. The geodesic
// metric minimizes path length in the closed domain and is required for
// slit polygons.
double dist_side(const Domain& d, int side_id, const Point2& p,
                 SideMetric metric);

// Length of the shortest path between interior points inside the closed
// domain (visibility graph over {p, q, reflex corners, slit endpoints}).
double geodesic_dist(const Domain& d, const Point2& p, const Point2& q);

// True if the closed segment p-q stays inside the closed domain.
bool segment_inside(const Domain& d, const Point2& p, const Point2& q);

// Supremum of geodesic distance. Exact (vertex pairs) for convex polygons;
// otherwise maximized over dense boundary samples at spacing ~diam/512 with
// one local refinement pass at ~diam/2048.
double inner_diameter(const Domain& d);

// Exact area (shoelace; pi a b; additive rounded formulas).
double area(const Domain& d);

// First boundary hit along ray p + t*dir for t in (0, tmax]; dir is a unit
// axis direction during rasterization but arbitrary units work.
std::optional<double> boundary_gap(const Domain& d, const Point2& p,
                                   const Point2& dir, double tmax);

// h_V(delta): fraction of the area within delta*diam_V of the boundary,
// by quadrature on a lattice of the returned spacing.
struct TubeRatio {
  double value = 0;
  double grid_spacing = 0;
};
TubeRatio tube_ratio(const Domain& d, double delta);

// Chebyshev data of a convex domain: center maximizing boundary distance,
// inscribed/circumscribed radii about it, K = A/a.
struct Eccentricity {
  Point2 center;
  double a = 0;  // inscribed radius
  double A = 0;  // circumscribed radius
  double K = 1;
};
Eccentricity eccentricity(const Domain& d);

// Checks h_V(delta) <= 1 - (1 - (2A/a) delta)^2 for each delta < a/(2A).
struct TubeBoundCheck {
  double delta = 0;
  double tube = 0;
  double bound = 0;
  double margin = 0;  // bound - tube
  bool holds = false;
};
std::vector<TubeBoundCheck> convex_tube_bound_check(
    const Domain& d, const std::vector<double>& deltas);

// Largest r (relative to dist_boundary) such that a ball of radius r fits in
// B(x, 2 dist(x)) \ U, minimized over the samples. Candidate centers sit on
// outward normals of the nearest boundary features and on exterior corner
// bisectors; r is located by bisection.
double exterior_ball_alpha(const Domain& d, const std::vector<Point2>& samples);

bool is_convex(const Domain& d);

}  // namespace specgeo
