#include "specgeo/experiment.hpp"

#include <chrono>
#include <cmath>
#include <climits>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "specgeo/analysis.hpp"
#include "specgeo/caricature.hpp"
#include "specgeo/heatkernel.hpp"
#include "specgeo/rng.hpp"
#include "specgeo/spectral.hpp"

namespace specgeo {
namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " +
                               where);
  }
  for (const auto& k : required) {
    if (!obj.count(k))
      throw std::runtime_error("config: missing key '" + k + "' in " + where);
  }
}

Point2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("config: " + where + " must be [x, y]");
  return Point2(j[0].get<double>(), j[1].get<double>());
}

struct ParsedDomain {
  Domain domain;
  // non-null for shapes that carry extra structure used by caricatures
  std::shared_ptr<PerturbedTriangle> perturbed;
  std::shared_ptr<PolygonDomain> sawtooth_base;
};

ParsedDomain parse_domain(const json& j, const std::string& where);

PolygonDomain parse_polygon_like(const json& j, const std::string& where) {
  ParsedDomain d = parse_domain(j, where);
  const auto* poly = d.domain.as_polygon();
  if (!poly) throw std::runtime_error("config: " + where + " must be polygonal");
  return *poly;
}

ParsedDomain parse_domain(const json& j, const std::string& where) {
  if (!j.is_object())
    throw std::runtime_error("config: " + where + " must be an object");
  const std::string shape = j.value("shape", "");
  auto labels_of = [&](const json& o) {
    InnerUniformityLabels lab;
    if (o.count("labels")) {
      require_keys(o["labels"], where + ".labels", {"C0", "c0"}, {});
      if (o["labels"].count("C0")) lab.C0 = o["labels"]["C0"].get<double>();
      if (o["labels"].count("c0")) lab.c0 = o["labels"]["c0"].get<double>();
    }
    return lab;
  };
  ParsedDomain out{Domain(PolygonDomain({{0, 0}, {1, 0}, {0, 1}})), nullptr,
                   nullptr};
  if (shape == "square") {
    require_keys(j, where, {"shape", "side", "corner", "labels"}, {"side"});
    const double s = j["side"].get<double>();
    const Point2 c = j.count("corner") ? parse_point(j["corner"], where)
                                       : Point2(0, 0);
    out.domain = Domain(build_rectangle(c, s, s));
  } else if (shape == "rectangle") {
    require_keys(j, where, {"shape", "width", "height", "corner", "labels"},
                 {"width", "height"});
    const Point2 c = j.count("corner") ? parse_point(j["corner"], where)
                                       : Point2(0, 0);
    out.domain = Domain(build_rectangle(c, j["width"].get<double>(),
                                        j["height"].get<double>()));
  } else if (shape == "triangle") {
    require_keys(j, where, {"shape", "vertices", "labels"}, {"vertices"});
    const auto& v = j["vertices"];
    if (v.size() != 3)
      throw std::runtime_error("config: triangle needs 3 vertices");
    out.domain = Domain(build_triangle(parse_point(v[0], where),
                                       parse_point(v[1], where),
                                       parse_point(v[2], where)));
  } else if (shape == "polygon") {
    require_keys(j, where, {"shape", "vertices", "slits", "labels"},
                 {"vertices"});
    std::vector<Point2> vv;
    for (const auto& p : j["vertices"]) vv.push_back(parse_point(p, where));
    std::vector<Segment> slits;
    if (j.count("slits")) {
      for (const auto& s : j["slits"])
        slits.push_back(
            {parse_point(s[0], where), parse_point(s[1], where)});
    }
    out.domain = Domain(PolygonDomain(std::move(vv), std::move(slits)));
  } else if (shape == "regular_polygon") {
    require_keys(j, where, {"shape", "n", "side", "center", "labels"},
                 {"n", "side"});
    const Point2 c = j.count("center") ? parse_point(j["center"], where)
                                       : Point2(0, 0);
    out.domain = Domain(
        build_regular_polygon(j["n"].get<int>(), j["side"].get<double>(), c));
  } else if (shape == "ellipse") {
    require_keys(j, where, {"shape", "center", "a", "b", "rotation", "labels"},
                 {"a", "b"});
    const Point2 c = j.count("center") ? parse_point(j["center"], where)
                                       : Point2(0, 0);
    out.domain = Domain(EllipseDomain(c, j["a"].get<double>(),
                                      j["b"].get<double>(),
                                      j.value("rotation", 0.0)));
  } else if (shape == "disk") {
    require_keys(j, where, {"shape", "radius", "center", "labels"},
                 {"radius"});
    const Point2 c = j.count("center") ? parse_point(j["center"], where)
                                       : Point2(0, 0);
    const double r = j["radius"].get<double>();
    out.domain = Domain(EllipseDomain(c, r, r, 0));
  } else if (shape == "sawtooth") {
    require_keys(j, where, {"shape", "base", "side", "count", "height",
                            "labels"},
                 {"base", "count", "height"});
    PolygonDomain base = parse_polygon_like(j["base"], where + ".base");
    out.sawtooth_base = std::make_shared<PolygonDomain>(base);
    out.domain = Domain(build_sawtooth_side(base, j.value("side", 0),
                                            j["count"].get<int>(),
                                            j["height"].get<double>()));
  } else if (shape == "perturbed_triangle") {
    require_keys(j, where, {"shape", "triangle", "p", "eps", "labels"},
                 {"triangle", "p", "eps"});
    PolygonDomain T = parse_polygon_like(j["triangle"], where + ".triangle");
    auto pt = std::make_shared<PerturbedTriangle>(build_perturbed_triangle(
        T, j["p"].get<double>(), j["eps"].get<double>()));
    out.perturbed = pt;
    out.domain = Domain(pt->polygon);
  } else if (shape == "rounded") {
    require_keys(j, where, {"shape", "base", "mode", "epsilon", "labels"},
                 {"base", "mode", "epsilon"});
    PolygonDomain base = parse_polygon_like(j["base"], where + ".base");
    const std::string mode = j["mode"].get<std::string>();
    if (mode != "corner_quarter_circles" && mode != "epsilon_neighborhood")
      throw std::runtime_error("config: unknown rounded mode " + mode);
    out.domain = Domain(RoundedDomain(
        base,
        mode == "corner_quarter_circles" ? RoundedMode::kCornerQuarterCircles
                                         : RoundedMode::kEpsilonNeighborhood,
        j["epsilon"].get<double>()));
  } else if (shape == "dilated") {
    require_keys(j, where, {"shape", "base", "c", "center", "labels"},
                 {"base", "c", "center"});
    ParsedDomain base = parse_domain(j["base"], where + ".base");
    out.domain = dilate(base.domain, j["c"].get<double>(),
                        parse_point(j["center"], where));
  } else {
    throw std::runtime_error("config: unknown shape '" + shape + "' in " +
                             where);
  }
  out.domain.labels = labels_of(j);
  return out;
}

struct ExperimentSpec {
  std::string name;
  std::string kind;
  json body;
  unsigned seed = 42;
};

double resolve_h(const json& j, const Domain& d, bool fast) {
  if (fast) return inner_diameter(d) / 64;
  if (j.count("h")) return j["h"].get<double>();
  const double divisor = j.count("h_divisor") ? j["h_divisor"].get<double>()
                                              : 256.0;
  return inner_diameter(d) / divisor;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Rows {
 public:
  Rows(std::string exp, const json& expect, double h) : exp_(std::move(exp)),
                                                        h_(h) {
    if (!expect.is_null()) expect_ = expect;
  }
  void add(const std::string& metric, double value) {
    ResultRow r;
    r.experiment = exp_;
    r.metric = metric;
    r.value = value;
    r.h = h_;
    if (expect_.count(metric)) {
      const auto& b = expect_.at(metric);
      r.bracket_lo = b[0].get<double>();
      r.bracket_hi = b[1].get<double>();
      r.pass = value >= *r.bracket_lo && value <= *r.bracket_hi;
    }
    rows_.push_back(std::move(r));
  }
  void add_flag(const std::string& metric, bool ok) {
    add(metric, ok ? 1.0 : 0.0);
    if (!expect_.count(metric)) rows_.back().pass = ok;
  }
  std::vector<ResultRow> take() { return std::move(rows_); }
  void set_h(double h) { h_ = h; }

 private:
  std::string exp_;
  json expect_;
  double h_;
  std::vector<ResultRow> rows_;
};

Spectrum solve_domain(const Domain& d, double h, int k, double tol,
                      const json& body, Grid* grid_out) {
  *grid_out = rasterize(d, h);
  SparseOperator A;
  if (body.count("operator") &&
      body["operator"].value("type", "laplacian") == "divergence") {
    const auto& op = body["operator"];
    require_keys(op, "operator", {"type", "a", "Lambda"}, {"a", "Lambda"});
    Eigen::Matrix2d a;
    a << op["a"][0][0].get<double>(), op["a"][0][1].get<double>(),
        op["a"][1][0].get<double>(), op["a"][1][1].get<double>();
    CoefficientField cf{[a](const Point2&) { return a; },
                        op["Lambda"].get<double>()};
    A = assemble_divergence_form(*grid_out, cf);
  } else {
    A = assemble_laplacian(*grid_out);
  }
  EigenSolveOptions eo;
  eo.tol = tol;
  return smallest_eigenpairs(A, *grid_out, k, eo);
}

// ---------------------------------------------------------------------------
// experiment kinds
// ---------------------------------------------------------------------------

std::vector<ResultRow> run_eigensolve(const ExperimentSpec& ex,
                                      const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  const double h = resolve_h(b, pd.domain, opts.fast);
  const int k = b.value("k", 1);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid grid;
  Spectrum spec =
      solve_domain(pd.domain, h, k, b.value("tol", 1e-8), b, &grid);
  for (int j = 0; j < k; ++j)
    rows.add("lambda_" + std::to_string(j + 1), spec.eigenvalues[j]);
  rows.add("residual_max", spec.residuals.maxCoeff());
  rows.add("phi1_min", spec.phi[0].minCoeff());
  const double diam = inner_diameter(pd.domain);
  rows.add("lambda1_diam2", spec.eigenvalues[0] * diam * diam);
  const auto dir = opts.out_dir / ex.name;
  std::filesystem::create_directories(dir);
  for (int j = 0; j < std::min(k, 3); ++j)
    render_field(grid, spec.phi[j],
                 dir / ("phi_" + std::to_string(j + 1) + ".pgm"));
  return rows.take();
}

std::vector<ResultRow> run_caricature_compare(const ExperimentSpec& ex,
                                              const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  const double h = resolve_h(b, pd.domain, opts.fast);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid grid;
  Spectrum spec = solve_domain(pd.domain, h, 1, b.value("tol", 1e-8), b, &grid);

  const std::string type = b.at("caricature").get<std::string>();
  PointFn phi;
  if (type == "triangle") {
    const auto* T = pd.domain.as_polygon();
    phi = [T](const Point2& p) { return phi_triangle(*T, p); };
  } else if (type == "regular_polygon") {
    const auto* P = pd.domain.as_polygon();
    phi = [P](const Point2& p) { return phi_regular_polygon(*P, p); };
  } else if (type == "polygon") {
    const auto* P = pd.domain.as_polygon();
    double r = 0;
    if (b.count("r")) {
      r = b["r"].get<double>();
    } else {
      double lg = 0;  // geometric mean of side lengths
      for (const auto& s : P->sides()) lg += std::log(s.length());
      r = std::exp(lg / P->side_count());
    }
    const auto chk = check_polygon_assumptions(*P, b.value("C", 10.0),
                                               b.value("alpha_floor", 0.17));
    rows.add_flag("assumptions_ok", chk.ok);
    phi = [P, r](const Point2& p) { return phi_polygon(*P, r, p); };
  } else if (type == "ellipse") {
    const auto* E = pd.domain.as_ellipse();
    phi = [E](const Point2& p) { return phi_ellipse(*E, p); };
  } else if (type == "perturbed_triangle") {
    auto pt = pd.perturbed;
    if (!pt)
      throw std::runtime_error(ex.name +
                               ": caricature requires a perturbed_triangle "
                               "domain");
    auto phiT = [pt](const Point2& q) { return phi_triangle(pt->unperturbed, q); };
    const double at_xe = phiT(pt->x_eps);
    phi = [pt, phiT, at_xe](const Point2& p) {
      return phi_perturbed_triangle(*pt, phiT, at_xe, p);
    };
    // branch agreement over the overlap annulus 2B \ B
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int i = 0; i < grid.size(); ++i) {
      const Point2 p = grid.node_point(i);
      const double rr = (p - pt->bump_ball_center).norm();
      if (rr <= pt->eps || rr > 2 * pt->eps) continue;
      const double nearv = perturbed_triangle_near_factor(*pt, p) * at_xe;
      const double farv = phiT(p);
      if (farv <= 0 || nearv <= 0) continue;
      lo = std::min(lo, nearv / farv);
      hi = std::max(hi, nearv / farv);
    }
    rows.add("overlap_factor", hi / lo);
  } else {
    throw std::runtime_error(ex.name + ": unknown caricature '" + type + "'");
  }
  const auto rep = comparability_report(grid, spec.phi[0], phi);
  rows.add("ratio_min", rep.ratio_min);
  rows.add("ratio_max", rep.ratio_max);
  rows.add("bracket", rep.bracket());
  rows.add("q01", rep.q01);
  rows.add("q50", rep.q50);
  rows.add("q99", rep.q99);
  rows.add("region_nodes", rep.node_count);
  return rows.take();
}

std::vector<ResultRow> run_sandwich(const ExperimentSpec& ex,
                                    const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain inner = parse_domain(b.at("inner"), ex.name + ".inner");
  ParsedDomain mid = parse_domain(b.at("mid"), ex.name + ".mid");
  ParsedDomain outer = parse_domain(b.at("outer"), ex.name + ".outer");
  const double h = resolve_h(b, inner.domain, opts.fast);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid gV, gU, gC;
  Spectrum sV = solve_domain(inner.domain, h, 1, b.value("tol", 1e-8), b, &gV);
  Spectrum sU = solve_domain(mid.domain, h, 1, b.value("tol", 1e-8), b, &gU);
  Spectrum sC = solve_domain(outer.domain, h, 1, b.value("tol", 1e-8), b, &gC);
  const auto rep = sandwich_check(gV, sV.phi[0], gU, sU.phi[0], gC, sC.phi[0]);
  rows.add("sup_inner_over_mid", rep.sup_inner_over_mid);
  rows.add("sup_mid_over_outer", rep.sup_mid_over_outer);
  rows.add("skipped_nodes", rep.skipped_nodes);
  rows.add("lambda_inner", sV.eigenvalues[0]);
  rows.add("lambda_mid", sU.eigenvalues[0]);
  rows.add("lambda_outer", sC.eigenvalues[0]);
  return rows.take();
}

std::vector<ResultRow> run_separation(const ExperimentSpec& ex,
                                      const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  const double h = resolve_h(b, pd.domain, opts.fast);
  const int kmax = b.value("k_max", 1);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid grid;
  Spectrum spec =
      solve_domain(pd.domain, h, kmax, b.value("tol", 1e-8), b, &grid);
  for (int k = 1; k <= kmax; ++k) {
    const auto rep = max_separation(spec, grid, pd.domain, k);
    rows.add("product_" + std::to_string(k), rep.product);
  }
  if (b.count("eps_near")) {
    rows.add("near_product",
             near_max_separation(spec, grid, pd.domain,
                                 b["eps_near"].get<double>()));
  }
  rows.add("beta_max", sup_norm_bounds(spec, area(pd.domain), area(pd.domain))
                           .lower_value);
  return rows.take();
}

std::vector<ResultRow> run_tube_profile(const ExperimentSpec& ex,
                                        const RunOptions&) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  Rows rows(ex.name, b.value("expect", json()), 0);
  std::vector<double> deltas;
  for (const auto& d : b.at("deltas")) deltas.push_back(d.get<double>());
  for (double d : deltas)
    rows.add("h_V_" + fmt(d), tube_ratio(pd.domain, d).value);
  if (is_convex(pd.domain)) {
    const auto checks = convex_tube_bound_check(pd.domain, deltas);
    for (const auto& c : checks) {
      rows.add("margin_" + fmt(c.delta), c.margin);
      rows.add_flag("holds_" + fmt(c.delta), c.holds);
    }
  }
  return rows.take();
}

std::vector<ResultRow> run_iu_ratio(const ExperimentSpec& ex,
                                    const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  const double h = resolve_h(b, pd.domain, opts.fast);
  const int K = b.value("K", 20);
  const int npairs = b.value("pairs", 50);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid grid;
  Spectrum spec = solve_domain(pd.domain, h, K, b.value("tol", 1e-8), b, &grid);
  const double diam = inner_diameter(pd.domain);
  DetRng rng(ex.seed);
  std::vector<std::pair<int, int>> pairs;
  while (static_cast<int>(pairs.size()) < npairs) {
    const int x = rng.below(grid.size());
    const int y = rng.below(grid.size());
    if (spec.phi[0][x] > 0 && spec.phi[0][y] > 0) pairs.push_back({x, y});
  }
  std::vector<double> tf;
  if (b.count("t_factors")) {
    for (const auto& t : b["t_factors"]) tf.push_back(t.get<double>());
  } else {
    tf = {0.5, 1.0, 2.0};
  }
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  bool floor_ok = true;
  for (double f : tf) {
    const double t = f * diam * diam;
    double worst = 0;
    for (const auto& [x, y] : pairs) {
      const auto r = iu_ratio_checked(spec, t, x, y, K, diam);
      floor_ok = floor_ok && !r.below_t_floor;
      worst = std::max(worst, std::abs(r.value - 1));
    }
    rows.add("max_dev_t" + fmt(f), worst);
    if (worst > prev + 1e-300) monotone = false;
    prev = worst;
  }
  rows.add_flag("monotone_decreasing", monotone);
  rows.add_flag("t_floor_ok", floor_ok);
  return rows.take();
}

std::vector<ResultRow> run_monotonicity(const ExperimentSpec& ex,
                                        const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain inner = parse_domain(b.at("inner"), ex.name + ".inner");
  ParsedDomain outer = parse_domain(b.at("outer"), ex.name + ".outer");
  const double h = resolve_h(b, inner.domain, opts.fast);
  const int k = b.value("k", 3);
  const int K = b.value("K", 20);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid gU, gV;
  Spectrum sU = solve_domain(inner.domain, h, std::max(k, K),
                             b.value("tol", 1e-8), b, &gU);
  Spectrum sV = solve_domain(outer.domain, h, std::max(k, K),
                             b.value("tol", 1e-8), b, &gV);
  const auto eig = eigen_monotonicity_check(sU, sV);
  bool all_ok = true;
  for (int j = 0; j < k; ++j) {
    rows.add("eig_margin_" + std::to_string(j + 1),
             sU.eigenvalues[j] - sV.eigenvalues[j]);
    all_ok = all_ok && eig[j].ok;
  }
  rows.add_flag("eig_monotone", all_ok);
  DetRng rng(ex.seed);
  std::vector<std::pair<int, int>> pairs;
  const int npairs = b.value("kernel_pairs", 100);
  for (int i = 0; i < npairs; ++i)
    pairs.push_back({rng.below(gU.size()), rng.below(gU.size())});
  const double t = 1.0 / sU.eigenvalues[0];
  const auto rep = kernel_monotonicity_check(sU, gU, sV, gV, t, pairs, K);
  rows.add("kernel_pairs", rep.pairs);
  rows.add("kernel_violations", rep.violations);
  rows.add("kernel_max_violation", rep.max_violation);
  return rows.take();
}

std::vector<ResultRow> run_heatkernel_envelope(const ExperimentSpec& ex,
                                               const RunOptions& opts) {
  const auto& b = ex.body;
  ParsedDomain pd = parse_domain(b.at("domain"), ex.name + ".domain");
  const double h = resolve_h(b, pd.domain, opts.fast);
  const int K = b.value("K", 20);
  const int nsamples = b.value("samples", 200);
  Rows rows(ex.name, b.value("expect", json()), h);
  Grid grid;
  Spectrum spec = solve_domain(pd.domain, h, K, b.value("tol", 1e-8), b, &grid);
  // sampler: t log-uniform in [0.5, 3]/lambda_1 (within the truncation
  // window), pairs coupled by |x-y|^2 <= 16 t so the truncated kernel stays
  // positive and resolvable
  const double lam1 = spec.eigenvalues[0];
  const double lamK = spec.eigenvalues[K - 1];
  const double tlo = std::max(0.5 / lam1, 0.1 / lamK);
  const double thi = 3.0 / lam1;
  DetRng rng(ex.seed);
  std::vector<EnvelopeSample> samples;
  int guard = 0;
  while (static_cast<int>(samples.size()) < nsamples && guard++ < 100000) {
    EnvelopeSample s;
    s.t = std::exp(rng.uniform(std::log(tlo), std::log(thi)));
    s.node_x = rng.below(grid.size());
    s.node_y = rng.below(grid.size());
    const Point2 px = grid.node_point(s.node_x);
    const Point2 py = grid.node_point(s.node_y);
    if (dist_boundary_unchecked(pd.domain, px) < 2 * h) continue;
    if (dist_boundary_unchecked(pd.domain, py) < 2 * h) continue;
    if ((px - py).squaredNorm() > 16 * s.t) continue;
    if (!(spec.phi[0][s.node_x] > 0 && spec.phi[0][s.node_y] > 0)) continue;
    samples.push_back(s);
  }
  EnvelopeOptions eo;
  eo.K = K;
  eo.geodesic_distance = b.value("geodesic_distance", true);
  const auto fit = kernel_envelope_fit(spec, grid, samples, eo);
  // kernel slice p(t, x_peak, .) at t = 1/lambda_1 as a heatmap
  {
    int peak = 0;
    spec.phi[0].maxCoeff(&peak);
    const double t = 1.0 / lam1;
    GridField slice(grid.size());
    for (int i = 0; i < grid.size(); ++i)
      slice[i] = dirichlet_kernel(spec, t, peak, i, K).value;
    const auto dir = opts.out_dir / ex.name;
    std::filesystem::create_directories(dir);
    render_field(grid, slice, dir / "kernel_slice.pgm");
  }
  rows.add("c1", fit.c1);
  rows.add("c2", fit.c2);
  rows.add("c3", fit.c3);
  rows.add("c4", fit.c4);
  rows.add("c1_over_c3", fit.c1_over_c3);
  rows.add_flag("fit_ok", fit.ok);
  rows.add("samples", static_cast<double>(samples.size()));
  return rows.take();
}

std::vector<ResultRow> run_green_check(const ExperimentSpec& ex,
                                       const RunOptions&) {
  const auto& b = ex.body;
  Rows rows(ex.name, b.value("expect", json()), 0);
  std::vector<double> eps_list = {0.1, 1.0, 10.0};
  if (b.count("eps_list")) {
    eps_list.clear();
    for (const auto& e : b["eps_list"]) eps_list.push_back(e.get<double>());
  }
  const int ns = b.value("samples", 64);
  const double rho_max = b.value("rho_max", 0.75);
  for (GreenMode mode : {GreenMode::kInterior, GreenMode::kExterior}) {
    const std::string tag = mode == GreenMode::kInterior ? "int" : "ext";
    std::vector<double> mins, maxs;
    for (double eps : eps_list) {
      DetRng rng(ex.seed);  // same draws for every eps: scale invariance
      std::vector<Point2> ys;
      for (int i = 0; i < ns; ++i) {
        const double rho = rng.uniform(1e-4, rho_max) * eps;
        const double th = rng.uniform(0, 2 * std::numbers::pi);
        const double r = mode == GreenMode::kInterior ? eps - rho : eps + rho;
        ys.push_back(r * Point2(std::cos(th), std::sin(th)));
      }
      const auto rep = green_linear_check(eps, mode, ys);
      mins.push_back(rep.ratio_min);
      maxs.push_back(rep.ratio_max);
    }
    rows.add("ratio_min_" + tag, mins[0]);
    rows.add("ratio_max_" + tag, maxs[0]);
    double drift = 0;
    for (size_t i = 1; i < mins.size(); ++i) {
      drift = std::max(drift, std::abs(mins[i] - mins[0]));
      drift = std::max(drift, std::abs(maxs[i] - maxs[0]));
    }
    rows.add("eps_invariance_" + tag, drift);
  }
  return rows.take();
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& ex,
                                      const RunOptions& opts) {
  if (ex.kind == "eigensolve") return run_eigensolve(ex, opts);
  if (ex.kind == "caricature_compare") return run_caricature_compare(ex, opts);
  if (ex.kind == "sandwich") return run_sandwich(ex, opts);
  if (ex.kind == "separation") return run_separation(ex, opts);
  if (ex.kind == "tube_profile") return run_tube_profile(ex, opts);
  if (ex.kind == "iu_ratio") return run_iu_ratio(ex, opts);
  if (ex.kind == "monotonicity") return run_monotonicity(ex, opts);
  if (ex.kind == "heatkernel_envelope")
    return run_heatkernel_envelope(ex, opts);
  if (ex.kind == "green_check") return run_green_check(ex, opts);
  throw std::runtime_error("config: unknown experiment kind '" + ex.kind +
                           "'");
}

}  // namespace

void render_field(const Grid& g, const GridField& f,
                  const std::filesystem::path& path) {
  if (f.size() != g.size())
    throw std::invalid_argument("render_field: field/grid mismatch");
  int ix0 = INT_MAX, ix1 = INT_MIN, iy0 = INT_MAX, iy1 = INT_MIN;
  for (int k = 0; k < g.size(); ++k) {
    const auto [ix, iy] = g.node_coords(k);
    ix0 = std::min(ix0, ix);
    ix1 = std::max(ix1, ix);
    iy0 = std::min(iy0, iy);
    iy1 = std::max(iy1, iy);
  }
  const double mx = std::max(f.maxCoeff(), 0.0);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("render_field: cannot open " +
                                     path.string());
  const int w = ix1 - ix0 + 1, hh = iy1 - iy0 + 1;
  out << "P2\n# h=" << fmt(g.h()) << " scale_max=" << fmt(mx) << "\n"
      << w << " " << hh << "\n255\n";
  for (int iy = iy1; iy >= iy0; --iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      int pix = 0;
      const int k = g.index_of(ix, iy);
      if (k >= 0 && mx > 0)
        pix = static_cast<int>(std::lround(255.0 * std::max(f[k], 0.0) / mx));
      out << pix << (ix == ix1 ? "" : " ");
    }
    out << "\n";
  }
}

RunResult run_config(const std::filesystem::path& config_path,
                     const RunOptions& opts) {
  std::ifstream in(config_path);
  if (!in)
    throw std::runtime_error("run_config: cannot read " +
                             config_path.string());
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") +
                             e.what());
  }
  require_keys(cfg, "top level", {"version", "seed", "experiments"},
               {"version", "experiments"});
  if (cfg["version"].get<int>() != 1)
    throw std::runtime_error("config: unsupported version");
  const unsigned seed = cfg.value("seed", 42u);

  std::vector<ExperimentSpec> specs;
  std::set<std::string> names;
  for (size_t i = 0; i < cfg["experiments"].size(); ++i) {
    const auto& e = cfg["experiments"][i];
    ExperimentSpec ex;
    ex.name = e.value("name", "");
    if (ex.name.empty())
      throw std::runtime_error("config: experiment without a name");
    if (!names.insert(ex.name).second)
      throw std::runtime_error("config: duplicate experiment name " + ex.name);
    ex.kind = e.value("kind", "");
    ex.body = e;
    ex.seed = seed + static_cast<unsigned>(i) * 1000003u;
    specs.push_back(std::move(ex));
  }
  // validate experiment-level keys before any output exists
  static const std::set<std::string> allowed = {
      "name", "kind", "domain", "inner", "mid", "outer", "h", "h_divisor",
      "k", "k_max", "K", "tol", "expect", "caricature", "r", "C",
      "alpha_floor", "deltas", "t_factors", "pairs", "kernel_pairs",
      "samples", "eps_list", "eps_near", "operator", "geodesic_distance",
      "rho_max"};
  for (const auto& ex : specs)
    require_keys(ex.body, "experiment " + ex.name, allowed, {"name", "kind"});

  std::filesystem::create_directories(opts.out_dir);
  std::vector<std::vector<ResultRow>> all(specs.size());
  std::vector<double> secs(specs.size(), 0);

  auto run_one = [&](size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all[i] = run_experiment(specs[i], opts);
    } catch (const std::exception& err) {
      ResultRow r;
      r.experiment = specs[i].name;
      r.metric = "error";
      r.value = 0;
      r.pass = false;
      all[i] = {r};
      std::fprintf(stderr, "experiment %s failed: %s\n",
                   specs[i].name.c_str(), err.what());
    }
    secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
  };
  if (opts.jobs <= 1) {
    for (size_t i = 0; i < specs.size(); ++i) run_one(i);
  } else {
    std::vector<std::future<void>> pend;
    size_t next = 0;
    while (next < specs.size() || !pend.empty()) {
      while (next < specs.size() &&
             pend.size() < static_cast<size_t>(opts.jobs)) {
        pend.push_back(std::async(std::launch::async, run_one, next));
        ++next;
      }
      pend.front().get();
      pend.erase(pend.begin());
    }
  }

  RunResult result;
  const auto csv = opts.out_dir / "results.csv";
  std::ofstream out(csv);
  out << "name,metric,value,bracket_lo,bracket_hi,pass,h,seconds\n";
  for (size_t i = 0; i < specs.size(); ++i) {
    for (auto& r : all[i]) {
      r.seconds = opts.real_timings ? secs[i] : 0.0;
      out << r.experiment << ',' << r.metric << ',' << fmt(r.value) << ',';
      if (r.bracket_lo) out << fmt(*r.bracket_lo);
      out << ',';
      if (r.bracket_hi) out << fmt(*r.bracket_hi);
      out << ',' << (r.pass ? 1 : 0) << ',' << fmt(r.h) << ','
          << fmt(r.seconds) << "\n";
      result.all_pass = result.all_pass && r.pass;
      result.rows.push_back(std::move(r));
    }
  }
  result.csv_path = csv.string();
  return result;
}

}  // namespace specgeo
