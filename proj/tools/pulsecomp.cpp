// SPDX-License-Identifier: Apache-2.0
//
// pulsecomp: config-driven experiment runner. Reads a JSON experiment
// config, runs it, and writes CSV results plus a manifest echoing the
// resolved configuration.
//
// Usage: pulsecomp <config.json> [--seed N] [--workers N] [--out DIR]
//
// Exit codes: 0 success, 2 config error, 3 numeric failure, 4 IO error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pulsecomp/experiments.hpp"
#include "pulsecomp/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radar pulse-compression simulation and Bayesian inference toolkit"};
  app.set_version_flag("--version", std::string(pulsecomp::kVersion));

  std::string config_path;
  app.add_option("config", config_path, "experiment config (JSON)")->required();
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "override the config seed");
  std::optional<int> workers;
  app.add_option("--workers", workers, "override the worker count");
  std::optional<std::string> out_dir;
  app.add_option("--out", out_dir, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    pulsecomp::ExperimentConfig cfg = pulsecomp::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) {
      if (*workers < 1) throw pulsecomp::ConfigError("--workers: must be >= 1");
      cfg.workers = *workers;
    }
    if (out_dir) cfg.output_dir = *out_dir;
    pulsecomp::run_experiment(cfg);
    return 0;
  } catch (const pulsecomp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pulsecomp::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const pulsecomp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
