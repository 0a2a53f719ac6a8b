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
#include <vector>

#include "phasediff/amplifier.hpp"
#include "phasediff/fock.hpp"

namespace phasediff {

enum class DensityOrigin { PFunction, PeggBarnett };

const char* origin_name(DensityOrigin origin);

/// Density on the uniform periodic grid phi[m] = origin_phi + 2 pi m / M.
struct PhaseDensity {
  std::vector<double> phi;
  std::vector<double> density;  ///< probability per radian
  DensityOrigin origin = DensityOrigin::PFunction;
  double t = 0.0;

  std::size_t size() const noexcept { return phi.size(); }
  double spacing() const;
  /// Rectangle rule over one period; exact for trigonometric polynomials of
  /// degree below the grid size.
  double total_mass() const;
};

/// Signal-to-spontaneous-noise ratio G |alpha|^2 / (G - 1) for the ideal
/// amplifier. Throws unless G > 1 + 1e-12.
double eta(const AmplifierParams& params, double amplitude_sq, double t);

/// Phase density of the P function for the ideal amplifier, evaluated as
///   e^{-eta}/(2 pi) + (c/(2 pi)) sqrt(pi eta) e^{-eta (1 - c^2)} (1 + erf(sqrt(eta) c))
/// with c = cos(phi - theta), which has no singularity at c = 0.
double p_function_phase_density(const AmplifierParams& params,
                                const CoherentInput& input, double t, double phi);

/// P-function density on `points` grid points starting at phi_0.
PhaseDensity p_function_density_grid(const AmplifierParams& params,
                                     const CoherentInput& input, double t,
                                     std::size_t points, double phi_0);

/// Pegg-Barnett density on phi_m = phi_0 + 2 pi m/(s+1), m = 0..s:
///   (1/2 pi) [R_0 + 2 sum_{d>=1} Re(R_d e^{i d phi_m})],  R_d = sum_n rho_{n,n+d}.
/// max_band limits the harmonics used (default: every stored band).
PhaseDensity pegg_barnett_distribution(const FockState& state, double phi_0,
                                       double t = 0.0,
                                       std::size_t max_band = static_cast<std::size_t>(-1));

inline constexpr double kEdgeMassWarning = 1e-6;

struct DistributionMoments {
  double peak_phi = 0.0;   ///< grid point with the largest density
  double mean = 0.0;       ///< mean offset from the peak
  double variance = 0.0;
  double edge_mass = 0.0;  ///< mass in the outermost cell on each side
  bool edge_warning = false;
};

/// Mean and variance over the window [peak - pi, peak + pi), weights
/// density * spacing normalised by the total mass.
DistributionMoments distribution_moments(const PhaseDensity& density);

double distribution_variance(const PhaseDensity& density);

}  // namespace phasediff
