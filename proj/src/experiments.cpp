// Copyright 2026 The phasediff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phasediff/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "phasediff/error.hpp"
#include "phasediff/expansion.hpp"
#include "phasediff/fock.hpp"
#include "phasediff/moments.hpp"
#include "phasediff/phase_distribution.hpp"
#include "phasediff/sde.hpp"
#include "phasediff/small_noise.hpp"

#ifndef PHASEDIFF_VERSION_STRING
#define PHASEDIFF_VERSION_STRING "0.0.0"
#endif

namespace phasediff {

namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;
constexpr char kMonteCarlo[] = "monte_carlo";

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string indexed(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu", stem, i);
  return buf;
}

struct Context {
  const ExperimentConfig& config;
  std::vector<CsvTable> tables;
  json diagnostics = json::object();
};

SdeConfig sde_config(const ExperimentConfig& c, std::uint64_t master_seed) {
  SdeConfig s;
  s.dt = c.dt;
  s.t_max = c.t_end;
  s.n_traj = c.n_traj;
  s.master_seed = master_seed;
  s.floor_epsilon = c.floor_epsilon;
  s.max_guard_hits = c.max_guard_hits;
  s.record_stride = c.record_stride();
  s.threads = c.threads;
  return s;
}

// The ensemble for amplitude index i uses master seed seed + i.
json ensemble_report(const TrajectoryEnsemble& ens, const ExperimentConfig& c,
                     std::uint64_t master_seed) {
  const double fraction = static_cast<double>(ens.n_aborted()) / static_cast<double>(ens.n_traj());
  json r;
  r["master_seed"] = master_seed;
  r["n_traj"] = ens.n_traj();
  r["aborted"] = ens.n_aborted();
  r["aborted_fraction"] = fraction;
  r["aborted_indices"] = ens.aborted_indices();
  r["flagged_indices"] = ens.flagged_indices();
  r["total_guard_hits"] = ens.total_guard_hits();
  if (fraction > c.max_abort_fraction) {
    throw_guard("aborted trajectory fraction " + label(fraction) + " exceeds max_abort_fraction " +
                label(c.max_abort_fraction) + " (" + std::to_string(ens.n_aborted()) + " of " +
                std::to_string(ens.n_traj()) + " crossed the positivity floor)");
  }
  return r;
}

void add_paths(Context& ctx, const char* name, const char* stem, const TrajectoryEnsemble& ens,
               Variable v) {
  const std::size_t kept = std::min(ctx.config.paths_kept, ens.n_traj());
  if (kept == 0) return;
  CsvTable t{name, {}};
  t.add("time", "grid").numbers = ens.times();
  for (std::size_t j = 0; j < kept; ++j) {
    const auto path = ens.path(v, j);
    t.add(indexed(stem, j), kMonteCarlo).numbers.assign(path.begin(), path.end());
  }
  ctx.tables.push_back(std::move(t));
}

void run_number_fan(Context& ctx) {
  const auto& c = ctx.config;
  const AmplifierParams params(c.kappa_up, c.kappa_down);
  const CoherentInput input{c.amplitude_sq[0], c.theta};
  const auto ens = simulate_polar(params, input, sde_config(c, c.seed));
  ctx.diagnostics["ensemble"] = ensemble_report(ens, c, c.seed);
  const auto stats = ensemble_stats(ens, Variable::N);

  CsvTable t{"number_fan", {}};
  t.add("time", "grid").numbers = stats.times;
  t.add("mean_number_mc", kMonteCarlo).numbers = stats.mean;
  t.add("se_mean_number_mc", kMonteCarlo).numbers = stats.se_mean;
  auto& exact = t.add("mean_number_analytic", "analytic:mean_photon").numbers;
  for (double time : stats.times) exact.push_back(mean_photon(params, input.amplitude_sq, time));
  ctx.tables.push_back(std::move(t));
  add_paths(ctx, "number_paths", "number", ens, Variable::N);
}

void run_variance_compare(Context& ctx) {
  const auto& c = ctx.config;
  const AmplifierParams params(c.kappa_up, c.kappa_down);
  CsvTable t{"variance_compare", {}};
  auto& amp = t.add("amplitude_sq", "config").numbers;
  auto& time = t.add("time", "grid").numbers;
  auto& sample = t.add("variance_mc", kMonteCarlo).numbers;
  auto& sample_se = t.add("se_variance_mc", kMonteCarlo).numbers;
  auto& expansion = t.add("variance_expansion_k" + std::to_string(c.k_order),
                          "analytic:inverse_number_expansion").numbers;
  auto& first = t.add("variance_expansion_k1", "analytic:inverse_number_expansion").numbers;
  auto& small = t.add("variance_small_noise", "analytic:small_noise").numbers;
  auto& flag = t.add("expansion_flagged", "diagnostic:last_term_fraction").numbers;

  json ensembles = json::array();
  json stationary = json::array();
  for (std::size_t i = 0; i < c.amplitude_sq.size(); ++i) {
    const CoherentInput input{c.amplitude_sq[i], c.theta};
    const std::uint64_t seed = c.seed + i;
    const auto ens = simulate_polar(params, input, sde_config(c, seed));
    json report = ensemble_report(ens, c, seed);
    report["amplitude_sq"] = input.amplitude_sq;
    ensembles.push_back(report);
    const auto stats = ensemble_stats(ens, Variable::Phi);
    const ExpansionTable table(params, c.k_order);
    const auto moments = initial_inverse_moments(input, c.k_order);
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
      const double tk = stats.times[k];
      amp.push_back(input.amplitude_sq);
      time.push_back(tk);
      sample.push_back(stats.variance[k]);
      sample_se.push_back(stats.se_variance[k]);
      expansion.push_back(phase_variance_expansion(table, moments, tk));
      first.push_back(phase_variance_expansion(params, input, 1, tk));
      small.push_back(small_noise_phase_variance(params, input, tk));
      flag.push_back(phase_variance_diagnostic(params, input, c.k_order, tk).flagged ? 1.0 : 0.0);
    }
    const std::size_t last = time.size() - 1;
    stationary.push_back({{"amplitude_sq", input.amplitude_sq},
                          {"time", time[last]},
                          {"variance_mc", sample[last]},
                          {"se_variance_mc", sample_se[last]},
                          {"variance_expansion", expansion[last]},
                          {"variance_small_noise", small[last]},
                          {"expansion_minus_small_noise", expansion[last] - small[last]}});
  }
  ctx.diagnostics["ensembles"] = ensembles;
  ctx.diagnostics["final_time"] = stationary;
  ctx.tables.push_back(std::move(t));
}

void run_snr_input(Context& ctx) {
  const auto& c = ctx.config;
  const AmplifierParams params(c.kappa_up, c.kappa_down);
  const auto grid = c.time_grid();
  CsvTable t{"snr_input", {}};
  t.add("time", "grid").numbers = grid;
  json limits = json::object();
  for (double a : c.amplitude_sq) {
    auto& col = t.add("inv_snr_" + label(a), "analytic:inverse_snr").numbers;
    for (double time : grid) col.push_back(inverse_snr(params, {a, c.theta}, time));
    limits[label(a)] = high_gain_inverse_snr(params, a);
  }
  ctx.diagnostics["high_gain_inverse_snr"] = limits;
  ctx.tables.push_back(std::move(t));
}

std::string rate_label(const RatePair& r) { return label(r.kappa_up) + "_" + label(r.kappa_down); }

void run_snr_nonideal(Context& ctx) {
  const auto& c = ctx.config;
  const CoherentInput input{c.amplitude_sq[0], c.theta};
  const auto grid = c.time_grid();
  CsvTable in_time{"snr_nonideal_time", {}};
  in_time.add("time", "grid").numbers = grid;
  CsvTable limit{"snr_nonideal_gain_limit", {}};
  auto& sweep = limit.add("amplitude_sq", "grid").numbers;
  for (std::size_t j = 0; j < c.sweep_points; ++j) {
    sweep.push_back(c.sweep_max * static_cast<double>(j) / static_cast<double>(c.sweep_points - 1));
  }
  for (const auto& r : c.rates) {
    const AmplifierParams params(r.kappa_up, r.kappa_down);
    auto& col = in_time.add("inv_snr_" + rate_label(r), "analytic:inverse_snr").numbers;
    for (double time : grid) col.push_back(inverse_snr(params, input, time));
    auto& lim = limit.add("sigma_" + rate_label(r), "analytic:high_gain_inverse_snr").numbers;
    for (double a : sweep) lim.push_back(high_gain_inverse_snr(params, a));
  }
  ctx.tables.push_back(std::move(in_time));
  ctx.tables.push_back(std::move(limit));
}

void run_inverse_expansion(Context& ctx) {
  const auto& c = ctx.config;
  const AmplifierParams params(c.kappa_up, c.kappa_down);
  const CoherentInput input{c.amplitude_sq[0], c.theta};
  const auto ens = simulate_inverse(params, input, sde_config(c, c.seed));
  ctx.diagnostics["ensemble"] = ensemble_report(ens, c, c.seed);
  const auto stats = ensemble_stats(ens, Variable::Upsilon);

  CsvTable t{"inverse_expansion", {}};
  t.add("time", "grid").numbers = stats.times;
  t.add("mean_upsilon_mc", kMonteCarlo).numbers = stats.mean;
  t.add("se_mean_upsilon_mc", kMonteCarlo).numbers = stats.se_mean;
  const ExpansionTable table(params, c.k_order);
  const auto moments = initial_inverse_moments(input, c.k_order);
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(c.k_order));
  for (double time : stats.times) {
    double sum = 0.0;
    for (int n = 1; n <= c.k_order; ++n) {
      sum += table.g(n, time) * moments[static_cast<std::size_t>(n - 1)];
      partial[static_cast<std::size_t>(n - 1)].push_back(sum);
    }
  }
  for (int n = 1; n <= c.k_order; ++n) {
    t.add("mean_upsilon_k" + std::to_string(n), "analytic:inverse_number_expansion").numbers =
        partial[static_cast<std::size_t>(n - 1)];
  }
  auto& small = t.add("mean_upsilon_small_noise", "analytic:small_noise").numbers;
  for (double time : stats.times) small.push_back(small_noise_inverse_mean(params, input, time));
  ctx.tables.push_back(std::move(t));
  add_paths(ctx, "upsilon_paths", "upsilon", ens, Variable::Upsilon);
}

json density_report(const PhaseDensity& d) {
  const auto m = distribution_moments(d);
  return {{"points", d.size()},
          {"total_mass", d.total_mass()},
          {"peak_phi", m.peak_phi},
          {"mean_offset", m.mean},
          {"variance", m.variance},
          {"edge_mass", m.edge_mass},
          {"edge_warning", m.edge_warning}};
}

struct DensityRun {
  AmplifierParams params;
  CoherentInput input;
  std::size_t cutoff;
  MasterEquationSolver solver;
};

DensityRun make_density_run(Context& ctx, double t_max) {
  const auto& c = ctx.config;
  const AmplifierParams params(c.kappa_up, c.kappa_down);
  const CoherentInput input{c.amplitude_sq[0], c.theta};
  const std::size_t s = c.cutoff > 0 ? c.cutoff : fock_cutoff(params, input, t_max);
  MasterEquationOptions options;
  options.band_limit = c.band_limit;
  DensityRun run{params, input, s, MasterEquationSolver(params, input, s, options)};
  ctx.diagnostics["master_equation"] = {{"cutoff", s},
                                        {"cutoff_rule", c.cutoff > 0 ? "config" : "tail_1e-10"},
                                        {"band_limit", run.solver.band_limit()},
                                        {"step", run.solver.max_step()}};
  return run;
}

json state_report(const DensityRun& run, const FockState& state, double t) {
  const double exact = mean_photon(run.params, run.input.amplitude_sq, t);
  return {{"time", t},
          {"trace", state.trace()},
          {"mean_photon", state.mean_photon()},
          {"mean_photon_analytic", exact},
          {"top_population", run.solver.top_population()},
          {"steps", run.solver.steps_taken()}};
}

void run_dist_converge(Context& ctx) {
  const auto& c = ctx.config;
  auto times = c.snapshot_times;
  std::sort(times.begin(), times.end());
  auto run = make_density_run(ctx, times.back());
  const double phi_0 = c.theta - kPi;

  CsvTable t{"phase_density", {}};
  auto& phi = t.add("phi", "grid").numbers;
  auto& density = t.add("density", "analytic:p_function|master_equation:pegg_barnett").numbers;
  auto& origin = t.add_text("origin", "label").text;
  auto& time = t.add("t", "grid").numbers;
  json snapshots = json::array();
  for (double tk : times) {
    run.solver.advance_to(tk);
    const auto state = run.solver.state();
    const auto p = p_function_density_grid(run.params, run.input, tk, c.phase_points, phi_0);
    const auto pb = pegg_barnett_distribution(state, phi_0, tk);
    const auto pb_half = pegg_barnett_distribution(state, phi_0, tk, run.solver.band_limit() / 2);
    for (const auto* d : {&p, &pb}) {
      phi.insert(phi.end(), d->phi.begin(), d->phi.end());
      density.insert(density.end(), d->density.begin(), d->density.end());
      origin.insert(origin.end(), d->size(), origin_name(d->origin));
      time.insert(time.end(), d->size(), tk);
    }
    json snap = state_report(run, state, tk);
    snap["p_function"] = density_report(p);
    snap["pegg_barnett"] = density_report(pb);
    snap["pegg_barnett_half_band_variance"] = distribution_variance(pb_half);
    snapshots.push_back(snap);
  }
  ctx.diagnostics["snapshots"] = snapshots;
  ctx.tables.push_back(std::move(t));
}

void run_variance_from_dist(Context& ctx) {
  const auto& c = ctx.config;
  const auto grid = c.time_grid();
  auto run = make_density_run(ctx, grid.back());
  const double phi_0 = c.theta - kPi;

  CsvTable t{"variance_from_dist", {}};
  t.add("time", "grid").numbers = grid;
  auto& var_p = t.add("variance_p_function", "analytic:p_function").numbers;
  auto& var_pb = t.add("variance_pegg_barnett", "master_equation:pegg_barnett").numbers;
  auto& edge_p = t.add("edge_mass_p_function", "diagnostic:edge_mass").numbers;
  auto& edge_pb = t.add("edge_mass_pegg_barnett", "diagnostic:edge_mass").numbers;
  bool warned = false;
  for (double tk : grid) {
    run.solver.advance_to(tk);
    const auto state = run.solver.state();
    const auto mp =
        distribution_moments(p_function_density_grid(run.params, run.input, tk, c.phase_points, phi_0));
    const auto mpb = distribution_moments(pegg_barnett_distribution(state, phi_0, tk));
    var_p.push_back(mp.variance);
    var_pb.push_back(mpb.variance);
    edge_p.push_back(mp.edge_mass);
    edge_pb.push_back(mpb.edge_mass);
    warned = warned || mp.edge_warning || mpb.edge_warning;
  }
  ctx.diagnostics["final_state"] = state_report(run, run.solver.state(), grid.back());
  ctx.diagnostics["edge_warning"] = warned;
  ctx.tables.push_back(std::move(t));
}

void dispatch(Context& ctx) {
  const auto& name = ctx.config.experiment;
  if (name == "number-fan") return run_number_fan(ctx);
  if (name == "variance-compare") return run_variance_compare(ctx);
  if (name == "snr-input") return run_snr_input(ctx);
  if (name == "snr-nonideal") return run_snr_nonideal(ctx);
  if (name == "inverse-expansion") return run_inverse_expansion(ctx);
  if (name == "dist-converge") return run_dist_converge(ctx);
  if (name == "variance-from-dist") return run_variance_from_dist(ctx);
  throw Error(ErrorCode::Validation, "unknown experiment '" + name + "'");
}

}  // namespace

const char* library_version() { return PHASEDIFF_VERSION_STRING; }

CsvColumn& CsvTable::add(std::string column, std::string provenance) {
  columns.push_back(CsvColumn{std::move(column), std::move(provenance), {}, {}, false});
  return columns.back();
}

CsvColumn& CsvTable::add_text(std::string column, std::string provenance) {
  columns.push_back(CsvColumn{std::move(column), std::move(provenance), {}, {}, true});
  return columns.back();
}

std::size_t CsvTable::rows() const { return columns.empty() ? 0 : columns.front().size(); }

std::string CsvTable::to_csv() const {
  const std::size_t n = rows();
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) {
      throw Error(ErrorCode::Internal, "table " + name + ": column " + columns[j].name +
                                           " has a different length");
    }
    out += (j ? "," : "") + columns[j].name;
  }
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      const auto& col = columns[j];
      if (col.is_text) {
        out += col.text[i];
        continue;
      }
      const double v = col.numbers[i];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::Internal,
                    "table " + name + ": non-finite value in column " + col.name);
      }
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

ResultBundle run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, {}, json::object()};
  dispatch(ctx);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ResultBundle bundle;
  bundle.experiment = config.experiment;
  bundle.config_echo = echo_config(config);

  json meta;
  meta["tool"] = "phasediff";
  meta["version"] = library_version();
  meta["experiment"] = config.experiment;
  meta["seed"] = config.seed;
  meta["config_echo"] = bundle.config_echo;
  meta["rng"] = {{"generator", "mt19937_64"},
                 {"stream_seed", "splitmix64(master_seed, trajectory_index)"},
                 {"normal", "box_muller"}};
  json tables = json::array();
  for (const auto& t : ctx.tables) {
    json cols = json::array();
    for (const auto& col : t.columns) cols.push_back({{"name", col.name}, {"provenance", col.provenance}});
    tables.push_back({{"file", t.name + ".csv"}, {"rows", t.rows()}, {"columns", cols}});
  }
  meta["tables"] = tables;
  meta["diagnostics"] = ctx.diagnostics;
  meta["wall_time_seconds"] = wall;
  bundle.metadata_json = meta.dump(2) + "\n";
  bundle.tables = std::move(ctx.tables);
  return bundle;
}

void write_bundle(const ResultBundle& bundle, const std::string& directory) {
  namespace fs = std::filesystem;
  // Render first so a malformed table leaves the directory untouched.
  std::vector<std::pair<fs::path, std::string>> files;
  const fs::path dir(directory);
  for (const auto& t : bundle.tables) files.emplace_back(dir / (t.name + ".csv"), t.to_csv());
  files.emplace_back(dir / "metadata.json", bundle.metadata_json);
  files.emplace_back(dir / "config.txt", bundle.config_echo);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + directory + ": " + ec.message());
  for (const auto& [path, body] : files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
}

}  // namespace phasediff
