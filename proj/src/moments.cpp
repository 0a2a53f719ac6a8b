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

#include "phasediff/moments.hpp"

#include <algorithm>
#include <cmath>

#include "phasediff/error.hpp"

namespace phasediff {
namespace {

void check_time(double t) {
  if (!std::isfinite(t) || t < 0.0) throw_invalid("time must be finite and >= 0");
}

void check_n0(double n0) {
  if (!std::isfinite(n0) || n0 < 0.0) throw_invalid("n0 must be finite and >= 0");
}

}  // namespace

double gain(const AmplifierParams& params, double t) {
  check_time(t);
  return std::exp(params.log_gain(t));
}

double gain_deficit(const AmplifierParams& params, double t) {
  check_time(t);
  return -std::expm1(-params.log_gain(t));
}

double mean_photon(const AmplifierParams& params, double n0, double t) {
  check_n0(n0);
  const double g = gain(params, t);
  // G (n0 + r q) with q = 1 - 1/G equals G n0 + r (G - 1).
  return g * (n0 + params.noise_ratio() * gain_deficit(params, t));
}

// Closed form for E[N^2(t)] rearranged with q = 1 - 1/G and r = kappa_up/kappa_minus:
//   G^2 n0_sq + 4 kappa_up G^2 {[(kappa_minus n0 + kappa_up)/kappa_minus^2] q
//                               - kappa_up/(2 kappa_minus^2) q (2 - q)}
//   = G^2 [n0_sq + 4 r q n0 + 2 r^2 q^2].
double second_moment_photon(const AmplifierParams& params, double n0,
                            double n0_sq, double t) {
  check_n0(n0);
  if (!std::isfinite(n0_sq) || n0_sq < n0 * n0 * (1.0 - 1e-15)) {
    throw_invalid("n0_sq must satisfy n0_sq >= n0^2");
  }
  const double g = gain(params, t);
  const double q = gain_deficit(params, t);
  const double r = params.noise_ratio();
  return g * g * (n0_sq + 4.0 * r * q * n0 + 2.0 * r * r * q * q);
}

double photon_variance(const AmplifierParams& params, double n0, double n0_sq,
                       double t) {
  check_n0(n0);
  if (!std::isfinite(n0_sq) || n0_sq < n0 * n0 * (1.0 - 1e-15)) {
    throw_invalid("n0_sq must satisfy n0_sq >= n0^2");
  }
  const double g = gain(params, t);
  const double q = gain_deficit(params, t);
  const double r = params.noise_ratio();
  const double v0 = std::max(0.0, n0_sq - n0 * n0);
  return g * g * (v0 + r * q * (2.0 * n0 + r * q));
}

double photon_variance(const AmplifierParams& params, const CoherentInput& input,
                       double t) {
  input.validate();
  const double n0 = input.amplitude_sq;
  return photon_variance(params, n0, n0 * n0, t);
}

double inverse_snr(const AmplifierParams& params, const CoherentInput& input,
                   double t) {
  input.validate();
  const double n0 = input.amplitude_sq;
  const double q = gain_deficit(params, t);
  const double r = params.noise_ratio();
  // G^2 cancels between V[N] and E[N]^2.
  const double scaled_mean = n0 + r * q;
  if (!(scaled_mean > 0.0)) throw_invalid("inverse_snr undefined for E[N(t)] = 0");
  return r * q * (2.0 * n0 + r * q) / (scaled_mean * scaled_mean);
}

double high_gain_inverse_snr(const AmplifierParams& params, double amplitude_sq) {
  if (!std::isfinite(amplitude_sq) || amplitude_sq < 0.0) {
    throw_invalid("amplitude_sq must be finite and >= 0");
  }
  const double r = params.noise_ratio();
  const double s = amplitude_sq + r;
  // (s^2 - a^2) / s^2 with s - a = r, kept free of cancellation.
  return r * (2.0 * amplitude_sq + r) / (s * s);
}

double small_noise_inverse_mean(const AmplifierParams& params,
                                const CoherentInput& input, double t) {
  const double mean = mean_photon(params, input.amplitude_sq, t);
  if (!(mean > 0.0)) throw_invalid("small_noise_inverse_mean needs E[N(t)] > 0");
  return (1.0 + inverse_snr(params, input, t)) / mean;
}

}  // namespace phasediff
