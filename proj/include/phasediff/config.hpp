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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Experiment configuration: a line-oriented `key = value` document.
//
//   # comment
//   experiment = variance-compare
//   seed = 42
//   amplitude_sq = 2.25, 13
//
// Lists are comma separated; rate pairs are written `kappa_up:kappa_down`.
// Every key has a default (experiment-specific where the experiment fixes
// one) except `experiment` and `seed`, which are required.

namespace phasediff {

struct ExperimentInfo {
  std::string name;
  std::string description;
  bool stochastic;      ///< runs the trajectory engine
  bool uses_expansion;  ///< needs amplitude_sq > 1
  bool uses_density;    ///< runs the master equation and needs kappa_down = 0
};

const std::vector<ExperimentInfo>& registered_experiments();
const ExperimentInfo* find_experiment(std::string_view name);

struct RatePair {
  double kappa_up = 1.0;
  double kappa_down = 0.0;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;

  double kappa_up = 1.0;
  double kappa_down = 0.0;
  std::vector<double> amplitude_sq{3.0};
  double theta = 0.0;
  std::vector<RatePair> rates;  ///< snr-nonideal sweep

  int k_order = 4;

  double t_start = 0.0;
  double t_end = 2.0;
  std::size_t time_points = 201;

  double dt = 1e-3;
  std::size_t n_traj = 100;
  unsigned threads = 1;
  double floor_epsilon = 1e-6;
  int max_guard_hits = 0;
  double max_abort_fraction = 0.02;
  std::size_t paths_kept = 0;  ///< leading trajectories written out in full, capped at n_traj

  std::vector<double> snapshot_times;  ///< dist-converge
  std::size_t phase_points = 1024;     ///< P-function grid
  std::size_t band_limit = 64;
  std::size_t cutoff = 0;  ///< 0 selects the tail rule

  double sweep_max = 20.0;  ///< snr-nonideal gain-limit sweep over amplitude_sq
  std::size_t sweep_points = 201;

  /// Analytic grid t_start + (t_end - t_start) k / (time_points - 1).
  std::vector<double> time_grid() const;
  /// Steps between recorded trajectory samples.
  std::size_t record_stride() const;
};

struct FieldError {
  std::string field;
  std::string message;
};

struct ValidationResult {
  ExperimentConfig config;
  std::vector<FieldError> errors;

  bool ok() const noexcept { return errors.empty(); }
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses `text`, applies `overrides` on top (later entries win) and checks
/// every field. All problems are reported; `config` is meaningful only when
/// ok().
ValidationResult validate_config(std::string_view text,
                                 const ConfigOverrides& overrides = {});

/// Canonical document: every key in a fixed order, numbers in shortest
/// round-trip form. validate_config(echo_config(c)) reproduces c exactly.
std::string echo_config(const ExperimentConfig& config);

/// Keys in canonical order.
const std::vector<std::string>& config_keys();

}  // namespace phasediff
