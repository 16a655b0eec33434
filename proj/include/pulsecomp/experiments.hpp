// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pulsecomp/config.hpp"
#include "pulsecomp/csv.hpp"
#include "pulsecomp/posterior.hpp"
#include "pulsecomp/selftest.hpp"
#include "pulsecomp/version.hpp"

namespace pulsecomp {

// Experiment runners behind the CLI. Each runner validates its parameters
// up front, computes, writes CSV files into the output directory, and
// returns the fully resolved parameter set (defaults included) for the
// manifest. Outputs are byte-identical for identical configs regardless of
// the worker count: all randomness flows through substreams keyed by
// (seed, fixed role constant, task index) and reductions run in task order.

struct RunOutput {
  json resolved_params = json::object();
  std::vector<std::string> files;
};

namespace detail {

// Fixed stream-role constants; replicate/chunk indices are derived below.
inline constexpr std::uint64_t kSimulateStream = 0x53494D55ULL;
inline constexpr std::uint64_t kLagStream = 0x4C414750ULL;
inline constexpr std::uint64_t kPosteriorStream = 0x504F5354ULL;
inline constexpr std::uint64_t kCompareStream = 0x434D5052ULL;
inline constexpr std::uint64_t kContractionStream = 0x434E5452ULL;

inline InverseWishartParams prior_from_params(const json& params, const std::string& path) {
  const json& prior = require_field(params, path, "prior");
  const double psi = require_number(prior, path + ".prior", "psi");
  const double nu = require_number(prior, path + ".prior", "nu");
  try {
    return InverseWishartParams::scalar(psi, nu);
  } catch (const Error& e) {
    throw ConfigError(path + ".prior: " + e.what());
  }
}

inline Temperature temperature_from_params(const json& params, const std::string& path) {
  const double t = require_number(params, path, "T");
  try {
    return Temperature(t);
  } catch (const Error& e) {
    throw ConfigError(path + ".T: " + e.what());
  }
}

}  // namespace detail

// --------------------------------------------------------------------------
// simulate: draws of (z, mu); one CSV per draw with columns
// t,re_z,im_z,re_mu,im_mu.
inline RunOutput run_simulate(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const PulseCode code = code_from_spec(require_field(p, "params", "code"), "params.code", cfg.seed);
  const Temperature t = detail::temperature_from_params(p, "params");
  VarianceField field = field_from_spec(require_field(p, "params", "field"), "params.field", code.d());
  const std::int64_t draws = integer_or(p, "params", "draws", 1);
  if (draws < 1) throw ConfigError("params.draws: must be >= 1");

  RunOutput out;
  const SignalSimulator sim(code, field, t);
  for (std::int64_t k = 0; k < draws; ++k) {
    RngStream rng(cfg.seed, detail::kSimulateStream + static_cast<std::uint64_t>(k));
    const SignalDraw draw = sim.draw(rng);
    ResultTable table;
    table.header = {"t", "re_z", "im_z", "re_mu", "im_mu"};
    for (Eigen::Index i = 0; i < draw.z.size(); ++i) {
      table.add_row({format_index(i), format_double(draw.z[i].real()),
                     format_double(draw.z[i].imag()), format_double(draw.mu[i].real()),
                     format_double(draw.mu[i].imag())});
    }
    char name[32];
    std::snprintf(name, sizeof(name), "signal_%03lld.csv", static_cast<long long>(k));
    write_csv(cfg.output_dir / name, table);
    out.files.emplace_back(name);
  }

  out.resolved_params = {{"code", p.at("code")},
                         {"field", p.at("field")},
                         {"T", t.value()},
                         {"draws", draws}};
  return out;
}

// --------------------------------------------------------------------------
// lagprofile: analytic lag profile next to its Monte Carlo estimate;
// columns t,tp,re,im,mc_re,mc_im,mc_se.
inline RunOutput run_lagprofile(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const PulseCode code = code_from_spec(require_field(p, "params", "code"), "params.code", cfg.seed);
  const Temperature t = detail::temperature_from_params(p, "params");
  VarianceField field = field_from_spec(require_field(p, "params", "field"), "params.field", code.d());
  const std::int64_t draws = integer_or(p, "params", "mc_draws", 10000);
  if (draws < 2) throw ConfigError("params.mc_draws: must be >= 2");

  const Eigen::Index d = code.d();
  const CMatrix analytic = lag_profile(code, field, t).matrix();

  // fixed-size chunks keyed by chunk index; reduction in chunk order
  const SignalSimulator sim(code, field, t);
  const std::int64_t chunk = 1024;
  const std::int64_t nchunks = (draws + chunk - 1) / chunk;
  std::vector<CMatrix> partial(static_cast<std::size_t>(nchunks));
  const RngStream base(cfg.seed, detail::kLagStream);
  parallel_for_index(static_cast<std::size_t>(nchunks), cfg.workers, [&](std::size_t c) {
    RngStream rng = base.derive(c);
    CMatrix acc = CMatrix::Zero(d, d);
    const std::int64_t lo = static_cast<std::int64_t>(c) * chunk;
    const std::int64_t hi = std::min(draws, lo + chunk);
    for (std::int64_t k = lo; k < hi; ++k) {
      const SignalDraw draw = sim.draw(rng);
      acc.noalias() += draw.z * draw.z.adjoint();
    }
    partial[c] = std::move(acc);
  });
  CMatrix mc = CMatrix::Zero(d, d);
  for (const CMatrix& m : partial) mc += m;
  mc /= static_cast<double>(draws);

  ResultTable table;
  table.header = {"t", "tp", "re", "im", "mc_re", "mc_im", "mc_se"};
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double se = std::sqrt(std::max(mc(i, i).real() * mc(j, j).real(), 0.0) /
                                  static_cast<double>(draws));
      table.add_row({format_index(i), format_index(j), format_double(analytic(i, j).real()),
                     format_double(analytic(i, j).imag()), format_double(mc(i, j).real()),
                     format_double(mc(i, j).imag()), format_double(se)});
    }
  }
  write_csv(cfg.output_dir / "lagprofile.csv", table);

  RunOutput out;
  out.files = {"lagprofile.csv"};
  out.resolved_params = {{"code", p.at("code")},
                         {"field", p.at("field")},
                         {"T", t.value()},
                         {"mc_draws", draws}};
  return out;
}

// --------------------------------------------------------------------------
// posterior: one simulated observation vector under the constant truth,
// then the grid posterior of v = T + sigma0^2; columns
// grid_v,logdensity,density.
inline RunOutput run_posterior(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const PulseCode code = code_from_spec(require_field(p, "params", "code"), "params.code", cfg.seed);
  const Temperature t = detail::temperature_from_params(p, "params");
  const double truth = require_number(p, "params", "truth_sigma0_sq");
  if (!(truth >= 0.0)) throw ConfigError("params.truth_sigma0_sq: must be >= 0");
  const InverseWishartParams prior = detail::prior_from_params(p, "params");
  const std::int64_t grid_points = integer_or(p, "params", "grid_points", 2000);
  if (grid_points < 100) throw ConfigError("params.grid_points: must be >= 100");

  const ConstantFieldLikelihood lik(code, t);
  RngStream rng(cfg.seed, detail::kPosteriorStream);
  const RVector z = lik.sample_observation(t.value() + truth, rng);
  const GridPosterior gp = detail::evaluate_constant_posterior(
      lik, lik.spectral_sq(z), prior.scalar_scale(), prior.dof(),
      static_cast<int>(grid_points));

  ResultTable table;
  table.header = {"grid_v", "logdensity", "density"};
  for (Eigen::Index i = 0; i < gp.grid.size(); ++i) {
    table.add_row({format_double(gp.grid[i]), format_double(gp.log_density[i]),
                   format_double(gp.density[i])});
  }
  write_csv(cfg.output_dir / "posterior.csv", table);

  RunOutput out;
  out.files = {"posterior.csv"};
  out.resolved_params = {{"code", p.at("code")},
                         {"T", t.value()},
                         {"truth_sigma0_sq", truth},
                         {"prior", prior.to_json()},
                         {"grid_points", grid_points}};
  return out;
}

// --------------------------------------------------------------------------
// compare-codes: spectral gap, covariance gap, both posterior-variance
// summaries, and the equivalence verdict; columns metric,value.
inline RunOutput run_compare_codes(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const PulseCode code1 = code_from_spec(require_field(p, "params", "code1"), "params.code1", cfg.seed);
  const PulseCode code2 = code_from_spec(require_field(p, "params", "code2"), "params.code2", cfg.seed);
  if (code1.d() != code2.d()) {
    throw ConfigError("params.code2: lattice size differs from params.code1");
  }
  const Temperature t = detail::temperature_from_params(p, "params");
  const double truth = require_number(p, "params", "truth_sigma0_sq");
  if (!(truth > 0.0)) throw ConfigError("params.truth_sigma0_sq: must be > 0");
  const InverseWishartParams prior = detail::prior_from_params(p, "params");
  const std::int64_t replicates = integer_or(p, "params", "replicates", 1000);
  if (replicates < 100) throw ConfigError("params.replicates: must be >= 100");
  const std::int64_t grid_points = integer_or(p, "params", "grid_points", 2000);
  if (grid_points < 100) throw ConfigError("params.grid_points: must be >= 100");

  const RngStream base(cfg.seed, detail::kCompareStream);
  const CompareCodesReport report = compare_codes(
      code1, code2, VarianceField::constant(truth), t, prior,
      static_cast<int>(replicates), base, cfg.workers, static_cast<int>(grid_points));

  ResultTable table;
  table.header = {"metric", "value"};
  table.add_row({"spectral_moduli_gap", format_double(report.spectral_moduli_gap)});
  table.add_row({"covariance_gap", format_double(report.covariance_gap)});
  table.add_row({"post_var_mean_1", format_double(report.summary1.variance)});
  table.add_row({"post_var_se_1", format_double(*report.summary1.mc_stderr)});
  table.add_row({"post_var_mean_2", format_double(report.summary2.variance)});
  table.add_row({"post_var_se_2", format_double(*report.summary2.mc_stderr)});
  table.add_row({"verdict", report.equivalent ? "equivalent" : "not-equivalent"});
  write_csv(cfg.output_dir / "compare_codes.csv", table);

  RunOutput out;
  out.files = {"compare_codes.csv"};
  out.resolved_params = {{"code1", p.at("code1")},   {"code2", p.at("code2")},
                         {"T", t.value()},           {"truth_sigma0_sq", truth},
                         {"prior", prior.to_json()}, {"replicates", replicates},
                         {"grid_points", grid_points}};
  return out;
}

// --------------------------------------------------------------------------
// contraction: posterior variance of v against the lattice size; columns
// d,post_var_mean,post_var_se.
inline RunOutput run_contraction(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const json& family = require_field(p, "params", "family");
  const std::string family_type = require_string(family, "params.family", "type");
  std::function<PulseCode(Eigen::Index)> code_family;
  if (family_type == "dirac") {
    code_family = [](Eigen::Index d) { return dirac(d); };
  } else if (family_type == "boxcar") {
    if (family.contains("width_fraction")) {
      const double frac = require_number(family, "params.family", "width_fraction");
      if (!(frac > 0.0 && frac <= 1.0)) {
        throw ConfigError("params.family.width_fraction: must be in (0, 1]");
      }
      code_family = [frac](Eigen::Index d) {
        const auto w = static_cast<Eigen::Index>(
            std::max<std::int64_t>(1, std::llround(frac * static_cast<double>(d))));
        return boxcar(d, std::min(w, d));
      };
    } else {
      const std::int64_t w = require_integer(family, "params.family", "width");
      if (w < 1) throw ConfigError("params.family.width: must be >= 1");
      code_family = [w](Eigen::Index d) {
        if (w > d) throw DomainError("boxcar width exceeds lattice size");
        return boxcar(d, w);
      };
    }
  } else {
    throw ConfigError("params.family.type: unknown family '" + family_type + "'");
  }

  const json& dl = require_field(p, "params", "d_list");
  if (!dl.is_array() || dl.empty()) throw ConfigError("params.d_list: expected a non-empty array");
  std::vector<Eigen::Index> d_list;
  for (std::size_t i = 0; i < dl.size(); ++i) {
    if (!dl[i].is_number_integer() || dl[i].get<std::int64_t>() < 1) {
      throw ConfigError("params.d_list[" + std::to_string(i) + "]: expected a positive integer");
    }
    d_list.push_back(dl[i].get<Eigen::Index>());
    if (i > 0 && d_list[i] <= d_list[i - 1]) {
      throw ConfigError("params.d_list: must be strictly increasing");
    }
  }

  const Temperature t = detail::temperature_from_params(p, "params");
  const double truth = require_number(p, "params", "truth_sigma0_sq");
  if (!(truth >= 0.0)) throw ConfigError("params.truth_sigma0_sq: must be >= 0");
  const InverseWishartParams prior = detail::prior_from_params(p, "params");
  const std::int64_t replicates = integer_or(p, "params", "replicates", 400);
  if (replicates < 100) throw ConfigError("params.replicates: must be >= 100");
  const std::int64_t grid_points = integer_or(p, "params", "grid_points", 2000);
  if (grid_points < 100) throw ConfigError("params.grid_points: must be >= 100");

  const RngStream base(cfg.seed, detail::kContractionStream);
  const auto rows = contraction_curve(code_family, t, truth, d_list, prior,
                                      static_cast<int>(replicates), base, cfg.workers,
                                      static_cast<int>(grid_points));

  ResultTable table;
  table.header = {"d", "post_var_mean", "post_var_se"};
  for (const ContractionRow& row : rows) {
    table.add_row({format_index(row.d), format_double(row.post_var_mean),
                   format_double(row.post_var_se)});
  }
  write_csv(cfg.output_dir / "contraction.csv", table);

  RunOutput out;
  out.files = {"contraction.csv"};
  out.resolved_params = {{"family", family},
                         {"d_list", p.at("d_list")},
                         {"T", t.value()},
                         {"truth_sigma0_sq", truth},
                         {"prior", prior.to_json()},
                         {"replicates", replicates},
                         {"grid_points", grid_points}};
  return out;
}

// --------------------------------------------------------------------------
// iw-check: scalar inverse Wishart density curves, one CSV per nu with
// columns x,density.
inline ResultTable emit_density_plot_data(double psi, double nu, const RVector& grid) {
  if (grid.size() < 1) throw GridError("density grid must not be empty");
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw GridError("density grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw GridError("density grid must be increasing");
  }
  ResultTable table;
  table.header = {"x", "density"};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    table.add_row({format_double(grid[i]),
                   format_double(std::exp(iw_log_density_scalar(psi, nu, grid[i])))});
  }
  return table;
}

inline RunOutput run_iw_check(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const double psi = number_or(p, "params", "psi", 1.0);
  if (!(psi > 0.0)) throw ConfigError("params.psi: must be > 0");

  std::vector<double> nus;
  if (p.contains("nus")) {
    nus = require_number_array(p, "params", "nus");
  } else {
    nus.push_back(number_or(p, "params", "nu", 3.0));
  }
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!(nus[i] > 0.0)) {
      throw ConfigError("params.nus[" + std::to_string(i) + "]: need nu > p - 1 = 0");
    }
  }

  const json grid_spec = p.contains("grid") ? p.at("grid") : json::object();
  const double lo = number_or(grid_spec, "params.grid", "min", 0.01);
  const double hi = number_or(grid_spec, "params.grid", "max", 5.0);
  const std::int64_t points = integer_or(grid_spec, "params.grid", "points", 500);
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("params.grid: need 0 < min < max");
  if (points < 2) throw ConfigError("params.grid.points: must be >= 2");
  RVector grid(points);
  for (std::int64_t i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }

  RunOutput out;
  for (const double nu : nus) {
    const ResultTable table = emit_density_plot_data(psi, nu, grid);
    const std::string name = "iw_density_nu" + format_double(nu) + ".csv";
    write_csv(cfg.output_dir / name, table);
    out.files.push_back(name);
  }
  out.resolved_params = {{"psi", psi},
                         {"nus", nus},
                         {"grid", {{"min", lo}, {"max", hi}, {"points", points}}}};
  return out;
}

// --------------------------------------------------------------------------
// selftest: cross-module invariant suite; columns check,pass. Nonzero exit
// (numeric failure) if any check fails.
inline RunOutput run_selftest(const ExperimentConfig& cfg) {
  const auto checks = selftest_checks(cfg.seed);
  ResultTable table;
  table.header = {"check", "pass"};
  bool all_ok = true;
  for (const auto& [name, ok] : checks) {
    table.add_row({name, ok ? "1" : "0"});
    all_ok = all_ok && ok;
  }
  write_csv(cfg.output_dir / "selftest.csv", table);
  if (!all_ok) throw NumericError("selftest failed; see selftest.csv");
  RunOutput out;
  out.files = {"selftest.csv"};
  out.resolved_params = json::object();
  return out;
}

// --------------------------------------------------------------------------

inline void write_manifest(const ExperimentConfig& cfg, const RunOutput& out) {
  json manifest{{"artifact_version", kVersion},
                {"experiment", cfg.experiment},
                {"seed", cfg.seed},
                {"workers", cfg.workers},
                {"output_dir", cfg.output_dir.generic_string()},
                {"params", out.resolved_params},
                {"outputs", out.files}};
  const std::filesystem::path path = cfg.output_dir / "manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << manifest.dump(2) << '\n';
  f.flush();
  if (!f) throw IoError("failed while writing " + path.string());
}

// Dispatch a validated config: writes the experiment's CSV files and a
// manifest echoing the resolved configuration.
inline void run_experiment(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string());

  RunOutput out;
  if (cfg.experiment == "simulate") {
    out = run_simulate(cfg);
  } else if (cfg.experiment == "lagprofile") {
    out = run_lagprofile(cfg);
  } else if (cfg.experiment == "posterior") {
    out = run_posterior(cfg);
  } else if (cfg.experiment == "compare-codes") {
    out = run_compare_codes(cfg);
  } else if (cfg.experiment == "contraction") {
    out = run_contraction(cfg);
  } else if (cfg.experiment == "iw-check") {
    out = run_iw_check(cfg);
  } else if (cfg.experiment == "selftest") {
    out = run_selftest(cfg);
  } else {
    throw ConfigError("config.experiment: unknown experiment '" + cfg.experiment + "'");
  }
  write_manifest(cfg, out);
}

}  // namespace pulsecomp
