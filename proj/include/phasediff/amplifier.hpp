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

namespace phasediff {

/// Gain and loss rates of the linear-amplifier master equation.
///
/// kappa_up drives stimulated plus spontaneous emission into the mode,
/// kappa_down drives photon loss. Every formula in this library assumes net
/// amplification, kappa_minus() > 0, and construction enforces it.
class AmplifierParams {
 public:
  /// Throws Error(InvalidArgument) unless kappa_up > 0, kappa_down >= 0 and
  /// kappa_up > kappa_down.
  AmplifierParams(double kappa_up, double kappa_down);

  static AmplifierParams ideal(double kappa_up) { return {kappa_up, 0.0}; }

  double kappa_up() const noexcept { return kappa_up_; }
  double kappa_down() const noexcept { return kappa_down_; }
  double kappa_minus() const noexcept { return kappa_up_ - kappa_down_; }

  /// kappa_up / kappa_minus, the spontaneous-emission noise per unit (G - 1).
  double noise_ratio() const noexcept { return kappa_up_ / kappa_minus(); }

  bool is_ideal() const noexcept { return kappa_down_ == 0.0; }

  /// kappa_minus * t, the natural log of the photon-number gain.
  double log_gain(double t) const noexcept { return kappa_minus() * t; }

 private:
  double kappa_up_;
  double kappa_down_;
};

/// Coherent input |alpha> with alpha = sqrt(amplitude_sq) exp(i theta).
///
/// In the P picture this is a deterministic point: N(0) = amplitude_sq and
/// Phi(0) = theta with zero variance.
struct CoherentInput {
  double amplitude_sq = 1.0;
  double theta = 0.0;

  /// Throws unless amplitude_sq > 0 and both fields are finite.
  void validate() const;

  /// The inverse-number expansion only converges when every realisation of
  /// N(0) exceeds one photon. Throws with a message naming that rule.
  void validate_for_expansion() const;
};

}  // namespace phasediff
