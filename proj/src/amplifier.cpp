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

#include "phasediff/amplifier.hpp"

#include <cmath>
#include <string>

#include "phasediff/error.hpp"

namespace phasediff {

AmplifierParams::AmplifierParams(double kappa_up, double kappa_down)
    : kappa_up_(kappa_up), kappa_down_(kappa_down) {
  if (!std::isfinite(kappa_up) || !(kappa_up > 0.0)) {
    throw_invalid("kappa_up must be a finite rate > 0, got " +
                  std::to_string(kappa_up));
  }
  if (!std::isfinite(kappa_down) || kappa_down < 0.0) {
    throw_invalid("kappa_down must be a finite rate >= 0, got " +
                  std::to_string(kappa_down));
  }
  if (!(kappa_up > kappa_down)) {
    throw_invalid("amplification requires kappa_minus = kappa_up - kappa_down > 0");
  }
}

void CoherentInput::validate() const {
  if (!std::isfinite(amplitude_sq) || !(amplitude_sq > 0.0)) {
    throw_invalid("amplitude_sq must be finite and > 0");
  }
  if (!std::isfinite(theta)) throw_invalid("theta must be finite");
}

void CoherentInput::validate_for_expansion() const {
  validate();
  if (!(amplitude_sq > 1.0)) {
    throw_invalid(
        "inverse-number expansion requires amplitude_sq > 1 (realisations of "
        "N(0) must be greater than one photon for convergence)");
  }
}

}  // namespace phasediff
