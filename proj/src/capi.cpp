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

#include "phasediff.h"

#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "phasediff/config.hpp"
#include "phasediff/error.hpp"
#include "phasediff/expansion.hpp"
#include "phasediff/experiment.hpp"
#include "phasediff/fock.hpp"
#include "phasediff/moments.hpp"
#include "phasediff/phase_distribution.hpp"
#include "phasediff/sde.hpp"
#include "phasediff/small_noise.hpp"

using namespace phasediff;

struct pd_expansion {
  ExpansionTable table;
};

struct pd_ensemble {
  TrajectoryEnsemble ensemble;
};

struct pd_fock_state {
  FockState state;
};

struct pd_phase_density {
  PhaseDensity density;
};

struct pd_config {
  std::string text;
  ConfigOverrides overrides;
  ValidationResult result;
  bool validated = false;
  std::string echo;
};

struct pd_result {
  ResultBundle bundle;
  std::vector<std::string> csv;
};

namespace {

thread_local std::string last_error;

pd_status fail(pd_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
pd_status guarded(F&& f) noexcept {
  try {
    last_error.clear();
    f();
    return PD_OK;
  } catch (const Error& e) {
    return fail(static_cast<pd_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PD_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw_invalid(std::string(name) + " must not be NULL");
}

void need_len(size_t len, size_t required) {
  if (len < required) {
    throw_invalid("buffer holds " + std::to_string(len) + " values, " +
                  std::to_string(required) + " required");
  }
}

Variable to_variable(pd_variable v) {
  switch (v) {
    case PD_VAR_N: return Variable::N;
    case PD_VAR_PHI: return Variable::Phi;
    case PD_VAR_UPSILON: return Variable::Upsilon;
  }
  throw_invalid("unknown variable");
}

SdeConfig to_sde(const pd_sde_config* c) {
  need(c, "config");
  SdeConfig s;
  s.dt = c->dt;
  s.t_max = c->t_max;
  s.n_traj = c->n_traj;
  s.master_seed = c->master_seed;
  s.floor_epsilon = c->floor_epsilon;
  s.max_guard_hits = c->max_guard_hits;
  s.record_stride = c->record_stride;
  s.threads = c->threads;
  return s;
}

CoherentInput coherent(double amplitude_sq, double theta) {
  CoherentInput input{amplitude_sq, theta};
  input.validate();
  return input;
}

}  // namespace

extern "C" {

const char* pd_version(void) { return library_version(); }

const char* pd_last_error(void) { return last_error.c_str(); }

const char* pd_status_name(pd_status status) {
  switch (status) {
    case PD_OK: return "ok";
    case PD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PD_ERR_VALIDATION: return "validation";
    case PD_ERR_NUMERICAL_GUARD: return "numerical_guard";
    case PD_ERR_IO: return "io";
    case PD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

pd_status pd_gain(double kappa_up, double kappa_down, double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = gain(AmplifierParams(kappa_up, kappa_down), t);
  });
}

pd_status pd_mean_photon(double kappa_up, double kappa_down, double n0, double t,
                         double* out) {
  return guarded([&] {
    need(out, "out");
    *out = mean_photon(AmplifierParams(kappa_up, kappa_down), n0, t);
  });
}

pd_status pd_second_moment_photon(double kappa_up, double kappa_down, double n0,
                                  double n0_sq, double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = second_moment_photon(AmplifierParams(kappa_up, kappa_down), n0, n0_sq, t);
  });
}

pd_status pd_photon_variance(double kappa_up, double kappa_down, double n0, double n0_sq,
                             double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = photon_variance(AmplifierParams(kappa_up, kappa_down), n0, n0_sq, t);
  });
}

pd_status pd_inverse_snr(double kappa_up, double kappa_down, double amplitude_sq, double t,
                         double* out) {
  return guarded([&] {
    need(out, "out");
    *out = inverse_snr(AmplifierParams(kappa_up, kappa_down), coherent(amplitude_sq, 0.0), t);
  });
}

pd_status pd_high_gain_inverse_snr(double kappa_up, double kappa_down, double amplitude_sq,
                                   double* out) {
  return guarded([&] {
    need(out, "out");
    *out = high_gain_inverse_snr(AmplifierParams(kappa_up, kappa_down), amplitude_sq);
  });
}

pd_status pd_small_noise_phase_variance(double kappa_up, double kappa_down,
                                        double amplitude_sq, double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = small_noise_phase_variance(AmplifierParams(kappa_up, kappa_down),
                                      coherent(amplitude_sq, 0.0), t);
  });
}

pd_status pd_phase_variance_expansion(double kappa_up, double kappa_down, double amplitude_sq,
                                      int order, double t, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = phase_variance_expansion(AmplifierParams(kappa_up, kappa_down),
                                    coherent(amplitude_sq, 0.0), order, t);
  });
}

pd_status pd_expansion_create(double kappa_up, double kappa_down, int order,
                              pd_expansion** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_expansion{ExpansionTable(AmplifierParams(kappa_up, kappa_down), order)};
  });
}

void pd_expansion_destroy(pd_expansion* table) { delete table; }

pd_status pd_expansion_beta(const pd_expansion* table, int k, int n, double* out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = table->table.beta(k, n);
  });
}

pd_status pd_expansion_g(const pd_expansion* table, int n, double t, double* out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = table->table.g(n, t);
  });
}

pd_status pd_expansion_chi(const pd_expansion* table, int n, double t, double* out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = table->table.chi(n, t);
  });
}

void pd_sde_config_default(pd_sde_config* config) {
  if (!config) return;
  const SdeConfig d;
  *config = pd_sde_config{d.dt,           d.t_max,          d.n_traj,        d.master_seed,
                          d.floor_epsilon, d.max_guard_hits, d.record_stride, d.threads};
}

pd_status pd_simulate_polar(double kappa_up, double kappa_down, double amplitude_sq,
                            double theta, const pd_sde_config* config, pd_ensemble** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_ensemble{simulate_polar(AmplifierParams(kappa_up, kappa_down),
                                          coherent(amplitude_sq, theta), to_sde(config))};
  });
}

pd_status pd_simulate_inverse(double kappa_up, double kappa_down, double amplitude_sq,
                              const pd_sde_config* config, pd_ensemble** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_ensemble{simulate_inverse(AmplifierParams(kappa_up, kappa_down),
                                            coherent(amplitude_sq, 0.0), to_sde(config))};
  });
}

void pd_ensemble_destroy(pd_ensemble* ensemble) { delete ensemble; }

pd_status pd_ensemble_shape(const pd_ensemble* ensemble, size_t* n_times, size_t* n_traj,
                            size_t* n_aborted) {
  return guarded([&] {
    need(ensemble, "ensemble");
    if (n_times) *n_times = ensemble->ensemble.n_times();
    if (n_traj) *n_traj = ensemble->ensemble.n_traj();
    if (n_aborted) *n_aborted = ensemble->ensemble.n_aborted();
  });
}

pd_status pd_ensemble_times(const pd_ensemble* ensemble, double* out, size_t len) {
  return guarded([&] {
    need(ensemble, "ensemble");
    need(out, "out");
    const auto& times = ensemble->ensemble.times();
    need_len(len, times.size());
    std::copy(times.begin(), times.end(), out);
  });
}

pd_status pd_ensemble_path(const pd_ensemble* ensemble, pd_variable variable,
                           size_t trajectory, double* out, size_t len) {
  return guarded([&] {
    need(ensemble, "ensemble");
    need(out, "out");
    const auto path = ensemble->ensemble.path(to_variable(variable), trajectory);
    need_len(len, path.size());
    std::copy(path.begin(), path.end(), out);
  });
}

pd_status pd_ensemble_stats(const pd_ensemble* ensemble, pd_variable variable, double* mean,
                            double* variance, double* se_mean, double* se_variance,
                            size_t len) {
  return guarded([&] {
    need(ensemble, "ensemble");
    const auto stats = ensemble_stats(ensemble->ensemble, to_variable(variable));
    need_len(len, stats.times.size());
    if (mean) std::copy(stats.mean.begin(), stats.mean.end(), mean);
    if (variance) std::copy(stats.variance.begin(), stats.variance.end(), variance);
    if (se_mean) std::copy(stats.se_mean.begin(), stats.se_mean.end(), se_mean);
    if (se_variance) std::copy(stats.se_variance.begin(), stats.se_variance.end(), se_variance);
  });
}

pd_status pd_fock_cutoff(double kappa_up, double kappa_down, double amplitude_sq, double t,
                         double tail_tolerance, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = fock_cutoff(AmplifierParams(kappa_up, kappa_down), coherent(amplitude_sq, 0.0), t,
                       tail_tolerance);
  });
}

pd_status pd_evolve_density(double kappa_up, double kappa_down, double amplitude_sq,
                            double theta, size_t cutoff, double t, double dt, size_t band_limit,
                            pd_fock_state** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_fock_state{evolve_density(AmplifierParams(kappa_up, kappa_down),
                                            coherent(amplitude_sq, theta), cutoff, t, dt,
                                            band_limit == 0 ? kDefaultBandLimit : band_limit)};
  });
}

void pd_fock_state_destroy(pd_fock_state* state) { delete state; }

pd_status pd_fock_state_info(const pd_fock_state* state, size_t* cutoff, double* trace,
                             double* mean_photon) {
  return guarded([&] {
    need(state, "state");
    if (cutoff) *cutoff = state->state.cutoff();
    if (trace) *trace = state->state.trace();
    if (mean_photon) *mean_photon = state->state.mean_photon();
  });
}

pd_status pd_fock_populations(const pd_fock_state* state, double* out, size_t len) {
  return guarded([&] {
    need(state, "state");
    need(out, "out");
    const auto p = state->state.populations();
    need_len(len, p.size());
    std::copy(p.begin(), p.end(), out);
  });
}

pd_status pd_pegg_barnett(const pd_fock_state* state, double phi_0, pd_phase_density** out) {
  return guarded([&] {
    need(state, "state");
    need(out, "out");
    *out = new pd_phase_density{pegg_barnett_distribution(state->state, phi_0)};
  });
}

pd_status pd_p_function_density(double kappa_up, double amplitude_sq, double theta, double t,
                                size_t points, double phi_0, pd_phase_density** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_phase_density{p_function_density_grid(
        AmplifierParams::ideal(kappa_up), coherent(amplitude_sq, theta), t, points, phi_0)};
  });
}

void pd_phase_density_destroy(pd_phase_density* density) { delete density; }

pd_status pd_phase_density_size(const pd_phase_density* density, size_t* out) {
  return guarded([&] {
    need(density, "density");
    need(out, "out");
    *out = density->density.size();
  });
}

pd_status pd_phase_density_values(const pd_phase_density* density, double* phi,
                                  double* values, size_t len) {
  return guarded([&] {
    need(density, "density");
    const auto& d = density->density;
    need_len(len, d.size());
    if (phi) std::copy(d.phi.begin(), d.phi.end(), phi);
    if (values) std::copy(d.density.begin(), d.density.end(), values);
  });
}

pd_status pd_phase_density_moments(const pd_phase_density* density, double* mean,
                                   double* variance, double* edge_mass, double* total_mass) {
  return guarded([&] {
    need(density, "density");
    const auto m = distribution_moments(density->density);
    if (mean) *mean = m.mean;
    if (variance) *variance = m.variance;
    if (edge_mass) *edge_mass = m.edge_mass;
    if (total_mass) *total_mass = density->density.total_mass();
  });
}

size_t pd_experiment_count(void) { return registered_experiments().size(); }

const char* pd_experiment_name(size_t index) {
  const auto& list = registered_experiments();
  return index < list.size() ? list[index].name.c_str() : nullptr;
}

const char* pd_experiment_description(size_t index) {
  const auto& list = registered_experiments();
  return index < list.size() ? list[index].description.c_str() : nullptr;
}

pd_status pd_config_create(pd_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pd_config{};
  });
}

void pd_config_destroy(pd_config* config) { delete config; }

pd_status pd_config_set_text(pd_config* config, const char* text, size_t len) {
  return guarded([&] {
    need(config, "config");
    if (len > 0) need(text, "text");
    config->text.assign(text ? text : "", len);
    config->validated = false;
  });
}

pd_status pd_config_load_file(pd_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, std::string("cannot read ") + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    config->text = buf.str();
    config->validated = false;
  });
}

pd_status pd_config_override(pd_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->overrides.emplace_back(key, value);
    config->validated = false;
  });
}

pd_status pd_config_validate(pd_config* config) {
  return guarded([&] {
    need(config, "config");
    config->result = validate_config(config->text, config->overrides);
    config->validated = config->result.ok();
    config->echo = config->validated ? echo_config(config->result.config) : std::string();
    if (!config->validated) {
      std::string msg = "invalid configuration:";
      for (const auto& e : config->result.errors) msg += " [" + e.field + "] " + e.message + ";";
      throw Error(ErrorCode::Validation, msg);
    }
  });
}

size_t pd_config_error_count(const pd_config* config) {
  return config ? config->result.errors.size() : 0;
}

const char* pd_config_error_field(const pd_config* config, size_t index) {
  if (!config || index >= config->result.errors.size()) return nullptr;
  return config->result.errors[index].field.c_str();
}

const char* pd_config_error_message(const pd_config* config, size_t index) {
  if (!config || index >= config->result.errors.size()) return nullptr;
  return config->result.errors[index].message.c_str();
}

const char* pd_config_echo(const pd_config* config) {
  return config && config->validated ? config->echo.c_str() : nullptr;
}

const char* pd_config_experiment(const pd_config* config) {
  return config && config->validated ? config->result.config.experiment.c_str() : nullptr;
}

pd_status pd_run(const pd_config* config, pd_result** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    if (!config->validated) throw Error(ErrorCode::Validation, "configuration is not validated");
    auto result = std::make_unique<pd_result>();
    result->bundle = run_experiment(config->result.config);
    for (const auto& t : result->bundle.tables) result->csv.push_back(t.to_csv());
    *out = result.release();
  });
}

void pd_result_destroy(pd_result* result) { delete result; }

size_t pd_result_table_count(const pd_result* result) {
  return result ? result->bundle.tables.size() : 0;
}

const char* pd_result_table_name(const pd_result* result, size_t index) {
  if (!result || index >= result->bundle.tables.size()) return nullptr;
  return result->bundle.tables[index].name.c_str();
}

const char* pd_result_table_csv(const pd_result* result, size_t index) {
  if (!result || index >= result->csv.size()) return nullptr;
  return result->csv[index].c_str();
}

const char* pd_result_metadata(const pd_result* result) {
  return result ? result->bundle.metadata_json.c_str() : nullptr;
}

pd_status pd_result_write(const pd_result* result, const char* directory) {
  return guarded([&] {
    need(result, "result");
    need(directory, "directory");
    write_bundle(result->bundle, directory);
  });
}

}  // extern "C"
