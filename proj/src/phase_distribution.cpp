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

#include "phasediff/phase_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phasediff/error.hpp"
#include "phasediff/moments.hpp"
#include "phasediff/special.hpp"

namespace phasediff {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

const char* origin_name(DensityOrigin origin) {
  return origin == DensityOrigin::PFunction ? "p_function" : "pegg_barnett";
}

double PhaseDensity::spacing() const {
  if (phi.empty()) throw_invalid("empty phase grid");
  return kTwoPi / static_cast<double>(phi.size());
}

double PhaseDensity::total_mass() const {
  double sum = 0.0;
  for (double v : density) sum += v;
  return sum * spacing();
}

double eta(const AmplifierParams& params, double amplitude_sq, double t) {
  if (!params.is_ideal()) throw_invalid("the closed-form phase density needs kappa_down = 0");
  if (!(amplitude_sq >= 0.0) || !std::isfinite(amplitude_sq)) {
    throw_invalid("amplitude_sq must be finite and nonnegative");
  }
  const double gm1 = std::expm1(params.log_gain(t));
  if (!(gm1 > 1e-12)) throw_invalid("phase density needs gain G > 1 + 1e-12 (t > 0)");
  return (gm1 + 1.0) * amplitude_sq / gm1;
}

double p_function_phase_density(const AmplifierParams& params,
                                const CoherentInput& input, double t, double phi) {
  const double e = eta(params, input.amplitude_sq, t);
  const double c = std::cos(phi - input.theta);
  const double sn = std::sin(phi - input.theta);
  const double root = std::sqrt(e);
  return (std::exp(-e) +
          c * std::sqrt(kPi * e) * std::exp(-e * sn * sn) * one_plus_erf(root * c)) /
         kTwoPi;
}

PhaseDensity p_function_density_grid(const AmplifierParams& params,
                                     const CoherentInput& input, double t,
                                     std::size_t points, double phi_0) {
  if (points < 2) throw_invalid("phase grid needs at least two points");
  PhaseDensity out;
  out.origin = DensityOrigin::PFunction;
  out.t = t;
  out.phi.resize(points);
  out.density.resize(points);
  for (std::size_t m = 0; m < points; ++m) {
    out.phi[m] = phi_0 + kTwoPi * static_cast<double>(m) / static_cast<double>(points);
    out.density[m] = p_function_phase_density(params, input, t, out.phi[m]);
  }
  return out;
}

PhaseDensity pegg_barnett_distribution(const FockState& state, double phi_0, double t,
                                       std::size_t max_band) {
  const auto sums = state.band_sums();
  const std::size_t bands = std::min(sums.size() - 1, max_band);
  const std::size_t points = state.dimension();
  PhaseDensity out;
  out.origin = DensityOrigin::PeggBarnett;
  out.t = t;
  out.phi.resize(points);
  out.density.resize(points);
  for (std::size_t m = 0; m < points; ++m) {
    const double phi = phi_0 + kTwoPi * static_cast<double>(m) / static_cast<double>(points);
    double v = sums[0].real();
    for (std::size_t d = 1; d <= bands; ++d) {
      const double angle = static_cast<double>(d) * phi;
      v += 2.0 * (sums[d].real() * std::cos(angle) - sums[d].imag() * std::sin(angle));
    }
    out.phi[m] = phi;
    out.density[m] = v / kTwoPi;
  }
  return out;
}

DistributionMoments distribution_moments(const PhaseDensity& density) {
  const std::size_t size = density.size();
  if (size < 2 || density.density.size() != size) throw_invalid("malformed phase density");
  const double h = density.spacing();
  const auto peak_it = std::max_element(density.density.begin(), density.density.end());
  const auto peak = static_cast<std::size_t>(peak_it - density.density.begin());

  DistributionMoments out;
  out.peak_phi = density.phi[peak];
  // Offsets j - peak wrapped into [-size/2, size - size/2).
  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  const auto n = static_cast<std::ptrdiff_t>(size);
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  double edge = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    std::ptrdiff_t k = j - static_cast<std::ptrdiff_t>(peak);
    if (k < -half) k += n;
    if (k >= n - half) k -= n;
    const double w = density.density[static_cast<std::size_t>(j)] * h;
    const double x = static_cast<double>(k) * h;
    mass += w;
    first += w * x;
    second += w * x * x;
    if (k == -half || k == n - half - 1) edge += std::abs(w);
  }
  if (!(mass > 0.0)) throw_invalid("phase density has no mass");
  out.mean = first / mass;
  out.variance = second / mass - out.mean * out.mean;
  out.edge_mass = edge / mass;
  out.edge_warning = out.edge_mass > kEdgeMassWarning;
  return out;
}

double distribution_variance(const PhaseDensity& density) {
  return distribution_moments(density).variance;
}

}  // namespace phasediff
