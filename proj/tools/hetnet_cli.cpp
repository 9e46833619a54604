// Command-line front end for hetnet experiments.
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 I/O failure.

#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hetnet/experiment.hpp"

int main(int argc, char **argv) {
  using namespace hetnet;
  CLI::App app{"HetNet analytic model, simulator and traffic schemes"};

  std::string spec_path, mode, out, sweep_param, sweep_values;
  std::uint64_t seed = 0;
  int realizations = -1, jobs = -1, probe_grid = -1, managed = -1;
  double window = -1.0, c_min = -1.0;
  app.add_option("--spec", spec_path, "Experiment or scenario JSON")
      ->required();
  auto *mode_opt = app.add_option(
      "--mode", mode,
      "analytic | simulate | compare | traffic-decentralized | "
      "traffic-centralized");
  auto *out_opt = app.add_option("--out", out, "Output directory");
  auto *seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--realizations", realizations, "Monte Carlo realizations");
  app.add_option("--window", window, "Simulation window side (m)");
  app.add_option("--jobs", jobs, "Worker threads (0: all cores)");
  app.add_option("--probe-grid", probe_grid,
                 "Typical users per realization: n x n probe lattice");
  app.add_option("--managed", managed,
                 "Decentralized mode: managed tier (1-based; 0: all)");
  app.add_option("--c-min", c_min, "Minimum tier-M throughput (bps)");
  auto *sp_opt = app.add_option(
      "--sweep", sweep_param,
      "Sweep parameter: inverse_bias | user_intensity | csma_threshold");
  app.add_option("--values", sweep_values,
                 "Comma-separated, strictly increasing sweep values")
      ->needs(sp_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    experiment::ExperimentSpec spec = experiment::spec_from_file(spec_path);
    if (*mode_opt)
      spec.mode = experiment::parse_mode(mode);
    if (*out_opt)
      spec.out_dir = out;
    if (*seed_opt)
      spec.seed = seed;
    if (realizations >= 0)
      spec.realizations = realizations;
    if (window >= 0.0)
      spec.window_side = window;
    if (jobs >= 0)
      spec.jobs = jobs;
    if (probe_grid >= 0)
      spec.probe_grid = probe_grid;
    if (managed >= 0)
      spec.managed_tier = managed;
    if (c_min >= 0.0)
      spec.c_min = c_min;
    if (*sp_opt) {
      spec.sweep.parameter = sweep_param;
      spec.sweep.values.clear();
      std::stringstream ss(sweep_values);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          spec.sweep.values.push_back(std::stod(item));
        } catch (const std::exception &) {
          throw ConfigError("/sweep/values", "not a number: '" + item + "'");
        }
      }
    }
    experiment::run(spec);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IOFailure &e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const Error &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
