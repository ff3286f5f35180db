#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "specgeo/experiment.hpp"

using namespace specgeo;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("eigensolve experiment produces the analytic eigenvalue") {
  const auto cfg = write_config("sg_test_eig.json", R"({
    "version": 1,
    "experiments": [
      {"name": "square", "kind": "eigensolve",
       "domain": {"shape": "square", "side": 1.0},
       "h": 0.015625, "k": 1,
       "expect": {"lambda_1": [19.7, 19.75]}}
    ]
  })");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out1";
  fs::remove_all(opts.out_dir);
  const auto result = run_config(cfg, opts);
  CHECK(result.all_pass);
  bool found = false;
  for (const auto& r : result.rows) {
    if (r.metric == "lambda_1") {
      found = true;
      CHECK(r.value == doctest::Approx(2 * 9.8696).epsilon(1e-3));
      CHECK(r.pass);
    }
  }
  CHECK(found);
  CHECK(fs::exists(opts.out_dir / "results.csv"));
  CHECK(fs::exists(opts.out_dir / "square" / "phi_1.pgm"));
}

TEST_CASE("empty experiment list yields a bare header") {
  const auto cfg = write_config("sg_test_empty.json",
                                R"({"version": 1, "experiments": []})");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out2";
  fs::remove_all(opts.out_dir);
  const auto result = run_config(cfg, opts);
  CHECK(result.all_pass);
  CHECK(slurp(opts.out_dir / "results.csv") ==
        "name,metric,value,bracket_lo,bracket_hi,pass,h,seconds\n");
}

TEST_CASE("malformed config fails before producing output") {
  const auto cfg = write_config("sg_test_bad.json", "{ not json");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out3";
  fs::remove_all(opts.out_dir);
  CHECK_THROWS(run_config(cfg, opts));
  CHECK_FALSE(fs::exists(opts.out_dir));
}

TEST_CASE("unknown keys are rejected") {
  const auto cfg = write_config("sg_test_unknown.json", R"({
    "version": 1,
    "experiments": [
      {"name": "x", "kind": "eigensolve", "bogus": 1,
       "domain": {"shape": "square", "side": 1.0}}
    ]
  })");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out4";
  fs::remove_all(opts.out_dir);
  CHECK_THROWS(run_config(cfg, opts));
}

TEST_CASE("reruns are byte identical") {
  const auto cfg = write_config("sg_test_det.json", R"({
    "version": 1,
    "seed": 42,
    "experiments": [
      {"name": "green", "kind": "green_check", "samples": 32},
      {"name": "tube", "kind": "tube_profile",
       "domain": {"shape": "square", "side": 1.0},
       "deltas": [0.02, 0.05]},
      {"name": "eig", "kind": "eigensolve",
       "domain": {"shape": "disk", "radius": 1.0}, "h": 0.05, "k": 2}
    ]
  })");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out5a";
  fs::remove_all(opts.out_dir);
  run_config(cfg, opts);
  const std::string first = slurp(opts.out_dir / "results.csv");
  RunOptions opts2 = opts;
  opts2.out_dir = fs::temp_directory_path() / "sg_test_out5b";
  fs::remove_all(opts2.out_dir);
  run_config(cfg, opts2);
  CHECK(first == slurp(opts2.out_dir / "results.csv"));
  CHECK(first.find("green") != std::string::npos);
}

TEST_CASE("render_field images") {
  Domain sq(build_rectangle({0, 0}, 1, 1));
  Grid g = rasterize(sq, 0.125);
  const fs::path dir = fs::temp_directory_path() / "sg_test_render";
  fs::create_directories(dir);

  render_field(g, GridField::Ones(g.size()), dir / "const.pgm");
  const std::string c = slurp(dir / "const.pgm");
  CHECK(c.find("255") != std::string::npos);
  CHECK(c.find("P2") == 0);

  render_field(g, GridField::Zero(g.size()), dir / "zero.pgm");
  std::istringstream zs(slurp(dir / "zero.pgm"));
  std::string magic, comment;
  std::getline(zs, magic);
  std::getline(zs, comment);
  int w, h, maxv;
  zs >> w >> h >> maxv;
  CHECK(w == 7);
  CHECK(h == 7);
  int pix, count = 0;
  while (zs >> pix) {
    CHECK(pix == 0);
    ++count;
  }
  CHECK(count == w * h);
}

TEST_CASE("field symmetry survives rendering pixel-exactly") {
  const auto cfg = write_config("sg_test_sym.json", R"({
    "version": 1,
    "experiments": [
      {"name": "sym", "kind": "eigensolve",
       "domain": {"shape": "square", "side": 1.0}, "h": 0.03125, "k": 1}
    ]
  })");
  RunOptions opts;
  opts.out_dir = fs::temp_directory_path() / "sg_test_out6";
  fs::remove_all(opts.out_dir);
  run_config(cfg, opts);
  std::istringstream in(slurp(opts.out_dir / "sym" / "phi_1.pgm"));
  std::string magic, comment;
  std::getline(in, magic);
  std::getline(in, comment);
  int w, h, maxv;
  in >> w >> h >> maxv;
  std::vector<int> pix(w * h);
  for (auto& p : pix) in >> p;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      CHECK(pix[y * w + x] == pix[y * w + (w - 1 - x)]);
      CHECK(pix[y * w + x] == pix[(h - 1 - y) * w + x]);
      CHECK(pix[y * w + x] == pix[x * w + y]);
    }
}

TEST_CASE("jobs and fast options keep results deterministic") {
  const auto cfg = write_config("sg_test_jobs.json", R"({
    "version": 1,
    "experiments": [
      {"name": "a", "kind": "eigensolve",
       "domain": {"shape": "square", "side": 1.0}, "h_divisor": 90, "k": 1},
      {"name": "b", "kind": "green_check", "samples": 16},
      {"name": "c", "kind": "tube_profile",
       "domain": {"shape": "square", "side": 1.0}, "deltas": [0.05]},
      {"name": "d", "kind": "caricature_compare",
       "domain": {"shape": "ellipse", "a": 1.3, "b": 1.0}, "h_divisor": 64,
       "caricature": "ellipse", "expect": {"bracket": [1.0, 30.0]}}
    ]
  })");
  RunOptions seq;
  seq.out_dir = fs::temp_directory_path() / "sg_test_jobs1";
  fs::remove_all(seq.out_dir);
  run_config(cfg, seq);
  RunOptions par = seq;
  par.out_dir = fs::temp_directory_path() / "sg_test_jobs2";
  par.jobs = 3;
  fs::remove_all(par.out_dir);
  run_config(cfg, par);
  CHECK(slurp(seq.out_dir / "results.csv") ==
        slurp(par.out_dir / "results.csv"));

  RunOptions fast = seq;
  fast.out_dir = fs::temp_directory_path() / "sg_test_jobs3";
  fast.fast = true;
  fs::remove_all(fast.out_dir);
  const auto rf = run_config(cfg, fast);
  for (const auto& r : rf.rows) {
    if (r.experiment == "a" && r.metric == "lambda_1")
      CHECK(r.h == doctest::Approx(std::sqrt(2.0) / 64));
  }
}
