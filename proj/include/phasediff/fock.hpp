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

#include <complex>
#include <cstddef>
#include <vector>

#include "phasediff/amplifier.hpp"

// Truncated Fock-space density matrices and the linear-amplifier master
// equation
//
//   drho/dt = kappa_down D[a] rho + kappa_up D[a^dag] rho
//
// with a and a^dag truncated to levels 0..s (a^dag |s> = 0). The truncated
// generator preserves the trace exactly.
//
// The generator maps the d-th superdiagonal rho_{n,n+d} onto itself, so a
// state is stored band by band. Dropping bands above band_limit leaves the
// kept bands exact; the dropped ones only carry phase harmonics of order
// above band_limit.

namespace phasediff {

using complex = std::complex<double>;

inline constexpr std::size_t kDefaultBandLimit = 64;
inline constexpr double kCutoffTailTolerance = 1e-10;
inline constexpr double kTopPopulationLimit = 1e-6;

class FockState {
 public:
  /// Zero matrix on levels 0..cutoff keeping bands 0..min(band_limit, cutoff).
  FockState(std::size_t cutoff, std::size_t band_limit);

  /// |alpha><alpha| restricted to levels 0..cutoff, alpha = |alpha| e^{i theta}.
  static FockState coherent(const CoherentInput& input, std::size_t cutoff,
                            std::size_t band_limit = kDefaultBandLimit);

  std::size_t cutoff() const noexcept { return cutoff_; }
  std::size_t dimension() const noexcept { return cutoff_ + 1; }
  std::size_t band_limit() const noexcept { return band_limit_; }
  bool full_bands() const noexcept { return band_limit_ == cutoff_; }

  /// rho_{n,m}; zero outside the stored bands.
  complex element(std::size_t n, std::size_t m) const;
  void set_upper(std::size_t n, std::size_t d, complex value);

  double population(std::size_t n) const;
  std::vector<double> populations() const;
  double trace() const;
  double mean_photon() const;
  /// Tr rho^2 over the stored bands (exact when full_bands()).
  double purity() const;

  /// sum_n rho_{n,n+d} for d = 0..band_limit.
  std::vector<complex> band_sums() const;

  /// Row-major (s+1)^2 matrix. Requires full_bands().
  std::vector<complex> to_dense() const;

  const std::vector<complex>& band(std::size_t d) const { return bands_.at(d); }
  std::vector<complex>& band(std::size_t d) { return bands_.at(d); }

 private:
  std::size_t cutoff_;
  std::size_t band_limit_;
  std::vector<std::vector<complex>> bands_;  // bands_[d][n] = rho_{n,n+d}
};

/// Number distribution of the amplified coherent state, a displaced thermal
/// state with thermal mean (kappa_up/kappa_minus)(G - 1) and coherent
/// intensity G |alpha|^2. Returns P(n) for n = 0..max_n.
std::vector<double> amplified_number_distribution(const AmplifierParams& params,
                                                  const CoherentInput& input,
                                                  double t, std::size_t max_n);

/// Smallest s with P(N > s) < tail_tolerance for the amplified state at t.
/// The input state at t = 0 is covered by the same bound.
std::size_t fock_cutoff(const AmplifierParams& params, const CoherentInput& input,
                        double t, double tail_tolerance = kCutoffTailTolerance);

struct MasterEquationOptions {
  /// Requested step; <= 0 selects 1e-3 / kappa_up. The integrator shortens
  /// it further when needed for RK4 stability at the given cutoff.
  double dt = 0.0;
  std::size_t band_limit = kDefaultBandLimit;
  /// advance_to() throws a numerical guard error when rho_{s,s} exceeds this.
  double top_population_limit = kTopPopulationLimit;
};

/// Fixed-step classical RK4 on the band representation. Bands evolve
/// independently; each is integrated in real arithmetic with the input
/// phase restored on output.
class MasterEquationSolver {
 public:
  MasterEquationSolver(const AmplifierParams& params, const CoherentInput& input,
                       std::size_t cutoff, const MasterEquationOptions& options = {});

  double time() const noexcept { return time_; }
  /// Largest step the solver will take.
  double max_step() const noexcept { return max_step_; }
  std::size_t cutoff() const noexcept { return cutoff_; }
  std::size_t band_limit() const noexcept { return band_limit_; }
  std::size_t steps_taken() const noexcept { return steps_; }

  /// Integrates to t >= time() in equal steps no longer than max_step().
  void advance_to(double t);

  double top_population() const;
  FockState state() const;

 private:
  void derivative(const std::vector<double>& y, std::vector<double>& out) const;

  AmplifierParams params_;
  double theta_;
  std::size_t cutoff_;
  std::size_t band_limit_;
  double top_limit_;
  double max_step_;
  double time_ = 0.0;
  std::size_t steps_ = 0;
  std::vector<std::size_t> offset_;  // start of band d in y_
  std::vector<double> sqrt_n_;       // sqrt(n), n = 0..s+1
  std::vector<double> y_;            // real band values, rho = e^{-i d theta} y
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// State at t from the coherent input; dt as in MasterEquationOptions.
FockState evolve_density(const AmplifierParams& params, const CoherentInput& input,
                         std::size_t cutoff, double t, double dt = 0.0,
                         std::size_t band_limit = kDefaultBandLimit);

struct StepRefinementReport {
  double step = 0.0;
  double max_population_difference = 0.0;
  double max_band_sum_difference = 0.0;
};

/// Runs the evolution at step and step/2 and compares populations and band
/// sums entrywise.
StepRefinementReport step_refinement_check(const AmplifierParams& params,
                                           const CoherentInput& input,
                                           std::size_t cutoff, double t,
                                           double dt = 0.0,
                                           std::size_t band_limit = kDefaultBandLimit);

}  // namespace phasediff
