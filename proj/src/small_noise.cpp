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

#include "phasediff/small_noise.hpp"

#include <cmath>

#include "phasediff/error.hpp"
#include "phasediff/moments.hpp"

namespace phasediff {
namespace {

void check_initial_variance(double v0) {
  if (!std::isfinite(v0) || v0 < 0.0) {
    throw_invalid("initial phase variance must be finite and >= 0");
  }
}

}  // namespace

SmallNoiseConstants small_noise_constants(const AmplifierParams& params,
                                          double mean_n0) {
  if (!std::isfinite(mean_n0) || !(mean_n0 > 0.0)) {
    throw_invalid("small-noise phase variance needs E[N(0)] > 0");
  }
  const double r = params.noise_ratio();
  return {mean_n0 + r, -r};
}

double small_noise_phase_variance(const AmplifierParams& params,
                                  const CoherentInput& input, double t,
                                  double initial_variance) {
  input.validate();
  check_initial_variance(initial_variance);
  const double n0 = input.amplitude_sq;
  const double r = params.noise_ratio();
  // ln[(a G - r) / (n0 G)] = ln[1 + (r/n0)(1 - 1/G)].
  return initial_variance + 0.5 * std::log1p(r / n0 * gain_deficit(params, t));
}

double small_noise_phase_variance_two_log(const AmplifierParams& params,
                                          const CoherentInput& input, double t,
                                          double initial_variance) {
  input.validate();
  check_initial_variance(initial_variance);
  const auto [a, b] = small_noise_constants(params, input.amplitude_sq);
  const double r = -b;
  const double g = gain(params, t);
  return initial_variance - 0.5 * std::log(input.amplitude_sq / a) -
         0.5 * std::log(a * g / (a * g - r));
}

double small_noise_variance_rate(const AmplifierParams& params,
                                 const CoherentInput& input, double t) {
  input.validate();
  return 0.5 * params.kappa_up() / mean_photon(params, input.amplitude_sq, t);
}

}  // namespace phasediff
