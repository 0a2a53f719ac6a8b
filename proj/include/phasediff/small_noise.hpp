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

#include "phasediff/amplifier.hpp"

namespace phasediff {

/// Constants of the integrand 1/(a e^{kappa_minus t} + b) = 1/E[N(t)].
struct SmallNoiseConstants {
  double a;  ///< E[N(0)] + kappa_up/kappa_minus
  double b;  ///< -kappa_up/kappa_minus
};

SmallNoiseConstants small_noise_constants(const AmplifierParams& params,
                                          double mean_n0);

/// Phase variance when N(t) is replaced by its mean:
///   V[Phi(0)] + (kappa_up/2) int_0^t dt' / E[N(t')].
///
/// Evaluated as V0 + 0.5 log1p((r / n0)(1 - 1/G_t)), which is the closed form
/// with both logarithms merged. initial_variance is zero for a coherent
/// P-point input.
double small_noise_phase_variance(const AmplifierParams& params,
                                  const CoherentInput& input, double t,
                                  double initial_variance = 0.0);

/// The textbook two-logarithm form of the same closed form. Kept for
/// cross-checks; prefer small_noise_phase_variance.
double small_noise_phase_variance_two_log(const AmplifierParams& params,
                                          const CoherentInput& input, double t,
                                          double initial_variance = 0.0);

/// d/dt of the small-noise variance: kappa_up / (2 E[N(t)]).
double small_noise_variance_rate(const AmplifierParams& params,
                                 const CoherentInput& input, double t);

}  // namespace phasediff
