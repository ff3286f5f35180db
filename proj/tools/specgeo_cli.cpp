// Experiment runner CLI: specgeo run <config.json> [--out DIR] [--jobs N]
// [--fast] [--timings]. Exit status 0 iff every metric passed its bracket.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "specgeo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral-geometry experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string config;
  specgeo::RunOptions opts;
  std::string out_dir = "out";
  run->add_option("config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", opts.jobs, "max concurrent experiments");
  run->add_flag("--fast", opts.fast, "swap h to inner_diameter/64 everywhere");
  run->add_flag("--timings", opts.real_timings,
                "write wall-clock seconds into results.csv (breaks "
                "byte-reproducibility)");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("SPECGEO_OUT")) out_dir = env;
  opts.out_dir = out_dir;

  try {
    const auto result = specgeo::run_config(config, opts);
    std::printf("%s: %zu rows, %s\n", result.csv_path.c_str(),
                result.rows.size(), result.all_pass ? "all pass" : "FAILURES");
    return result.all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
