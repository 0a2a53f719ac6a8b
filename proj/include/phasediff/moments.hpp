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

// Closed-form photon-number statistics of the amplified field and the
// signal-to-noise diagnostics built on them. All functions are pure and
// evaluate gain-dependent terms through expm1 of the log-gain, so they stay
// accurate for kappa_minus * t << 1.

namespace phasediff {

/// Photon-number gain G_t = exp(kappa_minus t). Requires t >= 0.
double gain(const AmplifierParams& params, double t);

/// 1 - 1/G_t, evaluated without cancellation.
double gain_deficit(const AmplifierParams& params, double t);

/// E[N(t)] = G_t n0 + (kappa_up/kappa_minus)(G_t - 1).
double mean_photon(const AmplifierParams& params, double n0, double t);

/// E[N^2(t)] for an initial distribution with E[N(0)] = n0 and
/// E[N^2(0)] = n0_sq. Requires n0_sq >= n0^2.
double second_moment_photon(const AmplifierParams& params, double n0,
                            double n0_sq, double t);

/// V[N(t)] for a general initial distribution (see second_moment_photon).
double photon_variance(const AmplifierParams& params, double n0, double n0_sq,
                       double t);

/// V[N(t)] for a coherent input, a deterministic point in the P picture.
double photon_variance(const AmplifierParams& params, const CoherentInput& input,
                       double t);

/// 1/sigma(t) = V[N(t)] / E[N(t)]^2.
double inverse_snr(const AmplifierParams& params, const CoherentInput& input,
                   double t);

/// Large-gain limit of inverse_snr for a coherent input:
/// [(|a|^2 + r)^2 - |a|^4] / (|a|^2 + r)^2 with r = kappa_up/kappa_minus.
/// amplitude_sq = 0 is allowed and gives exactly 1.
double high_gain_inverse_snr(const AmplifierParams& params, double amplitude_sq);

/// Second-order Taylor estimate of E[1/N(t)] about the mean:
/// (1/E[N]) (1 + 1/sigma).
double small_noise_inverse_mean(const AmplifierParams& params,
                                const CoherentInput& input, double t);

}  // namespace phasediff
