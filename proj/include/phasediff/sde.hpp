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
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "phasediff/amplifier.hpp"

// Euler-Maruyama integration of the Ito SDEs for photon number N, phase Phi
// and inverse number Upsilon = 1/N in the P representation.
//
// Every trajectory owns an RNG stream derived from (master_seed, index), so
// an ensemble is bit-identical for a given SdeConfig whatever the thread
// count. Each step consumes two standard normals, dV_N first and dV_Phi
// second, in both simulate_polar and simulate_inverse; the two share Wiener
// increments trajectory by trajectory.

namespace phasediff {

struct SdeConfig {
  double dt = 1e-3;
  double t_max = 1.0;
  std::size_t n_traj = 100;
  std::uint64_t master_seed = 0;
  /// N is held at or above this many photons (Upsilon at or below its
  /// inverse). Each activation counts as a guard hit.
  double floor_epsilon = 1e-6;
  /// A trajectory with more than this many guard hits is aborted and
  /// excluded from statistics.
  int max_guard_hits = 0;
  /// Keep every record_stride-th step (the final step is always kept).
  std::size_t record_stride = 1;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 1;

  void validate() const;
  std::size_t n_steps() const;
};

enum class Variable { N, Phi, Upsilon };

const char* variable_name(Variable v);

class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble() = default;

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t n_times() const noexcept { return times_.size(); }
  std::size_t n_traj() const noexcept { return seeds_.size(); }

  bool has(Variable v) const noexcept { return !data(v).empty(); }

  /// Recorded path of one trajectory; values after an abort repeat the last
  /// accepted state.
  std::span<const double> path(Variable v, std::size_t traj) const;
  double value(Variable v, std::size_t traj, std::size_t time_index) const;

  const std::vector<std::uint64_t>& seeds() const noexcept { return seeds_; }
  int guard_hits(std::size_t traj) const { return guard_hits_.at(traj); }
  bool aborted(std::size_t traj) const { return aborted_.at(traj) != 0; }
  std::size_t n_aborted() const noexcept;
  std::vector<std::size_t> aborted_indices() const;
  /// Trajectories with at least one guard activation, aborted or not.
  std::vector<std::size_t> flagged_indices() const;
  std::size_t total_guard_hits() const noexcept;

 private:
  friend class EnsembleBuilder;

  const std::vector<double>& data(Variable v) const noexcept;

  std::vector<double> times_;
  std::vector<double> n_;        // [traj * n_times + k]
  std::vector<double> phi_;
  std::vector<double> upsilon_;
  std::vector<std::uint64_t> seeds_;
  std::vector<int> guard_hits_;
  std::vector<unsigned char> aborted_;
};

/// Integrates dPhi = sqrt(kappa_up/(2N)) dV_Phi and
/// dN = (kappa_up + kappa_minus N) dt + sqrt(2 kappa_up N) dV_N from the
/// deterministic start N(0) = amplitude_sq, Phi(0) = theta. Phi is kept
/// unwrapped.
TrajectoryEnsemble simulate_polar(const AmplifierParams& params,
                                  const CoherentInput& input,
                                  const SdeConfig& config);

/// Integrates dUpsilon = -(kappa_minus U - kappa_up U^2) dt
///                       - U^2 sqrt(2 kappa_up / U) dV_N
/// from Upsilon(0) = 1/amplitude_sq. Requires amplitude_sq > 1.
TrajectoryEnsemble simulate_inverse(const AmplifierParams& params,
                                    const CoherentInput& input,
                                    const SdeConfig& config);

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;     ///< unbiased
  double se_mean = 0.0;
  double se_variance = 0.0;  ///< from the fourth central moment
};

/// Requires at least two samples.
SampleStats sample_stats(std::span<const double> samples);

struct TimeSeriesStats {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> se_mean;
  std::vector<double> se_variance;
  std::size_t count = 0;  ///< surviving trajectories used at every time
};

/// Per-time statistics over trajectories that were not aborted, reduced in
/// trajectory-index order. An optional transform is applied to each value
/// first (e.g. x -> x*x for E[N^2]).
TimeSeriesStats ensemble_stats(const TrajectoryEnsemble& ensemble, Variable v,
                               const std::function<double(double)>& transform = {});

/// splitmix64 finaliser used to derive per-trajectory seeds.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index);

/// Standard normal stream: mt19937_64 bits, 53-bit uniforms, Box-Muller.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace phasediff
