// Declarative experiment runner: JSON configs in, results.csv and PGM field
// images out. Configs double as regression fixtures, so parsing is strict
// (unknown keys rejected) and every run is deterministic for a fixed seed.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specgeo/grid.hpp"

namespace specgeo {

struct ResultRow {
  std::string experiment;
  std::string metric;
  double value = 0;
  std::optional<double> bracket_lo;
  std::optional<double> bracket_hi;
  bool pass = true;
  double h = 0;
  double seconds = 0;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  bool fast = false;           // swap h to inner_diameter/64 everywhere
  bool real_timings = false;   // write wall seconds instead of 0.000
};

struct RunResult {
  std::vector<ResultRow> rows;
  bool all_pass = true;
  std::string csv_path;
};

// Executes every experiment in the config, writes <out>/results.csv and
// per-experiment field images; returns the collected rows. Parse errors
// throw before any output is created.
RunResult run_config(const std::filesystem::path& config_path,
                     const RunOptions& opts);

// Grayscale P2 image of a field: [0, max f] mapped linearly onto [0, 255],
// exterior pixels 0; the header comment records h and the value scale.
void render_field(const Grid& g, const GridField& f,
                  const std::filesystem::path& path);

}  // namespace specgeo
