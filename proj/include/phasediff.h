/* Copyright 2026 The phasediff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PHASEDIFF_H
#define PHASEDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define PD_API __attribute__((visibility("default")))
#else
#define PD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a pd_status. On failure the message is
 * available from pd_last_error() on the same thread until the next call. */
typedef enum pd_status {
  PD_OK = 0,
  PD_ERR_INVALID_ARGUMENT = 1,
  PD_ERR_VALIDATION = 2,
  PD_ERR_NUMERICAL_GUARD = 3,
  PD_ERR_IO = 4,
  PD_ERR_INTERNAL = 5
} pd_status;

PD_API const char* pd_version(void);
PD_API const char* pd_last_error(void);
PD_API const char* pd_status_name(pd_status status);

/* ---- Analytic photon-number and phase statistics -------------------------
 * Rates must satisfy kappa_up > 0, kappa_down >= 0, kappa_up > kappa_down. */

PD_API pd_status pd_gain(double kappa_up, double kappa_down, double t, double* out);
PD_API pd_status pd_mean_photon(double kappa_up, double kappa_down, double n0, double t,
                                double* out);
PD_API pd_status pd_second_moment_photon(double kappa_up, double kappa_down, double n0,
                                         double n0_sq, double t, double* out);
PD_API pd_status pd_photon_variance(double kappa_up, double kappa_down, double n0,
                                    double n0_sq, double t, double* out);
/* Coherent input with amplitude_sq = |alpha|^2. */
PD_API pd_status pd_inverse_snr(double kappa_up, double kappa_down, double amplitude_sq,
                                double t, double* out);
PD_API pd_status pd_high_gain_inverse_snr(double kappa_up, double kappa_down,
                                          double amplitude_sq, double* out);
PD_API pd_status pd_small_noise_phase_variance(double kappa_up, double kappa_down,
                                               double amplitude_sq, double t, double* out);
/* Requires amplitude_sq > 1 and order >= 1. */
PD_API pd_status pd_phase_variance_expansion(double kappa_up, double kappa_down,
                                             double amplitude_sq, int order, double t,
                                             double* out);

/* ---- Inverse-number expansion coefficients ------------------------------- */

typedef struct pd_expansion pd_expansion;

PD_API pd_status pd_expansion_create(double kappa_up, double kappa_down, int order,
                                     pd_expansion** out);
PD_API void pd_expansion_destroy(pd_expansion* table);
/* Indices are 1-based: 1 <= k, n <= order. */
PD_API pd_status pd_expansion_beta(const pd_expansion* table, int k, int n, double* out);
PD_API pd_status pd_expansion_g(const pd_expansion* table, int n, double t, double* out);
PD_API pd_status pd_expansion_chi(const pd_expansion* table, int n, double t, double* out);

/* ---- Trajectory ensembles ------------------------------------------------ */

typedef struct pd_sde_config {
  double dt;
  double t_max;
  size_t n_traj;
  uint64_t master_seed;
  double floor_epsilon;
  int max_guard_hits;
  size_t record_stride;
  unsigned threads; /* 0 = hardware concurrency */
} pd_sde_config;

typedef enum pd_variable { PD_VAR_N = 0, PD_VAR_PHI = 1, PD_VAR_UPSILON = 2 } pd_variable;

typedef struct pd_ensemble pd_ensemble;

PD_API void pd_sde_config_default(pd_sde_config* config);
/* Number and phase paths. */
PD_API pd_status pd_simulate_polar(double kappa_up, double kappa_down, double amplitude_sq,
                                   double theta, const pd_sde_config* config,
                                   pd_ensemble** out);
/* Inverse-number paths; requires amplitude_sq > 1. */
PD_API pd_status pd_simulate_inverse(double kappa_up, double kappa_down,
                                     double amplitude_sq, const pd_sde_config* config,
                                     pd_ensemble** out);
PD_API void pd_ensemble_destroy(pd_ensemble* ensemble);
PD_API pd_status pd_ensemble_shape(const pd_ensemble* ensemble, size_t* n_times,
                                   size_t* n_traj, size_t* n_aborted);
/* Copies n_times values. */
PD_API pd_status pd_ensemble_times(const pd_ensemble* ensemble, double* out, size_t len);
PD_API pd_status pd_ensemble_path(const pd_ensemble* ensemble, pd_variable variable,
                                  size_t trajectory, double* out, size_t len);
/* Per-time statistics over surviving trajectories; each output holds n_times
 * values and may be NULL. */
PD_API pd_status pd_ensemble_stats(const pd_ensemble* ensemble, pd_variable variable,
                                   double* mean, double* variance, double* se_mean,
                                   double* se_variance, size_t len);

/* ---- Master equation and phase densities --------------------------------- */

typedef struct pd_fock_state pd_fock_state;
typedef struct pd_phase_density pd_phase_density;

/* Smallest cutoff with output tail probability below tail_tolerance. */
PD_API pd_status pd_fock_cutoff(double kappa_up, double kappa_down, double amplitude_sq,
                                double t, double tail_tolerance, size_t* out);
/* Evolves |alpha><alpha| to t. dt <= 0 and band_limit == 0 select defaults. */
PD_API pd_status pd_evolve_density(double kappa_up, double kappa_down, double amplitude_sq,
                                   double theta, size_t cutoff, double t, double dt,
                                   size_t band_limit, pd_fock_state** out);
PD_API void pd_fock_state_destroy(pd_fock_state* state);
PD_API pd_status pd_fock_state_info(const pd_fock_state* state, size_t* cutoff,
                                    double* trace, double* mean_photon);
/* Copies populations rho_nn, n = 0..cutoff. */
PD_API pd_status pd_fock_populations(const pd_fock_state* state, double* out, size_t len);

PD_API pd_status pd_pegg_barnett(const pd_fock_state* state, double phi_0,
                                 pd_phase_density** out);
/* Ideal amplifier (kappa_down = 0) only; t > 0. */
PD_API pd_status pd_p_function_density(double kappa_up, double amplitude_sq, double theta,
                                       double t, size_t points, double phi_0,
                                       pd_phase_density** out);
PD_API void pd_phase_density_destroy(pd_phase_density* density);
PD_API pd_status pd_phase_density_size(const pd_phase_density* density, size_t* out);
PD_API pd_status pd_phase_density_values(const pd_phase_density* density, double* phi,
                                         double* values, size_t len);
PD_API pd_status pd_phase_density_moments(const pd_phase_density* density, double* mean,
                                          double* variance, double* edge_mass,
                                          double* total_mass);

/* ---- Experiments --------------------------------------------------------- */

PD_API size_t pd_experiment_count(void);
PD_API const char* pd_experiment_name(size_t index);
PD_API const char* pd_experiment_description(size_t index);

typedef struct pd_config pd_config;

/* Collects a config document and key overrides; nothing is checked until
 * pd_config_validate. */
PD_API pd_status pd_config_create(pd_config** out);
PD_API void pd_config_destroy(pd_config* config);
PD_API pd_status pd_config_set_text(pd_config* config, const char* text, size_t len);
PD_API pd_status pd_config_load_file(pd_config* config, const char* path);
PD_API pd_status pd_config_override(pd_config* config, const char* key, const char* value);
/* PD_OK, or PD_ERR_VALIDATION with every problem listed below. */
PD_API pd_status pd_config_validate(pd_config* config);
PD_API size_t pd_config_error_count(const pd_config* config);
PD_API const char* pd_config_error_field(const pd_config* config, size_t index);
PD_API const char* pd_config_error_message(const pd_config* config, size_t index);
/* Valid after a successful pd_config_validate. */
PD_API const char* pd_config_echo(const pd_config* config);
PD_API const char* pd_config_experiment(const pd_config* config);

typedef struct pd_result pd_result;

PD_API pd_status pd_run(const pd_config* config, pd_result** out);
PD_API void pd_result_destroy(pd_result* result);
PD_API size_t pd_result_table_count(const pd_result* result);
PD_API const char* pd_result_table_name(const pd_result* result, size_t index);
/* Rendered CSV text, or NULL for a bad index. */
PD_API const char* pd_result_table_csv(const pd_result* result, size_t index);
PD_API const char* pd_result_metadata(const pd_result* result);
PD_API pd_status pd_result_write(const pd_result* result, const char* directory);

#ifdef __cplusplus
}
#endif

#endif /* PHASEDIFF_H */
