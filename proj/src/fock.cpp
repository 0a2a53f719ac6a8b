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

#include "phasediff/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phasediff/error.hpp"
#include "phasediff/moments.hpp"

namespace phasediff {

namespace {
constexpr double kStepFactor = 1.25;
}  // namespace

FockState::FockState(std::size_t cutoff, std::size_t band_limit)
    : cutoff_(cutoff), band_limit_(std::min(band_limit, cutoff)) {
  bands_.resize(band_limit_ + 1);
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    bands_[d].assign(cutoff_ + 1 - d, complex{});
  }
}

FockState FockState::coherent(const CoherentInput& input, std::size_t cutoff,
                              std::size_t band_limit) {
  input.validate();
  FockState state(cutoff, band_limit);
  const double a2 = input.amplitude_sq;
  const double log_a = 0.5 * std::log(a2);
  for (std::size_t d = 0; d <= state.band_limit_; ++d) {
    const complex phase = std::polar(1.0, -static_cast<double>(d) * input.theta);
    auto& band = state.bands_[d];
    for (std::size_t n = 0; n < band.size(); ++n) {
      const double nn = static_cast<double>(n);
      const double dd = static_cast<double>(d);
      const double log_r = -a2 + (2.0 * nn + dd) * log_a -
                           0.5 * (std::lgamma(nn + 1.0) + std::lgamma(nn + dd + 1.0));
      band[n] = std::exp(log_r) * phase;
    }
  }
  return state;
}

complex FockState::element(std::size_t n, std::size_t m) const {
  if (n > cutoff_ || m > cutoff_) throw_invalid("Fock index beyond cutoff");
  if (n <= m) {
    const std::size_t d = m - n;
    return d <= band_limit_ ? bands_[d][n] : complex{};
  }
  const std::size_t d = n - m;
  return d <= band_limit_ ? std::conj(bands_[d][m]) : complex{};
}

void FockState::set_upper(std::size_t n, std::size_t d, complex value) {
  if (d > band_limit_ || n + d > cutoff_) throw_invalid("band entry out of range");
  if (d == 0) value = complex(value.real(), 0.0);
  bands_[d][n] = value;
}

double FockState::population(std::size_t n) const { return bands_[0].at(n).real(); }

std::vector<double> FockState::populations() const {
  std::vector<double> p(dimension());
  for (std::size_t n = 0; n <= cutoff_; ++n) p[n] = bands_[0][n].real();
  return p;
}

double FockState::trace() const {
  double sum = 0.0;
  for (const auto& v : bands_[0]) sum += v.real();
  return sum;
}

double FockState::mean_photon() const {
  double sum = 0.0;
  for (std::size_t n = 0; n <= cutoff_; ++n) sum += static_cast<double>(n) * bands_[0][n].real();
  return sum;
}

double FockState::purity() const {
  double sum = 0.0;
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    double band_sum = 0.0;
    for (const auto& v : bands_[d]) band_sum += std::norm(v);
    sum += (d == 0 ? 1.0 : 2.0) * band_sum;
  }
  return sum;
}

std::vector<complex> FockState::band_sums() const {
  std::vector<complex> sums(band_limit_ + 1);
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    complex s{};
    for (const auto& v : bands_[d]) s += v;
    sums[d] = s;
  }
  return sums;
}

std::vector<complex> FockState::to_dense() const {
  if (!full_bands()) throw_invalid("dense form needs every band stored");
  const std::size_t dim = dimension();
  std::vector<complex> dense(dim * dim);
  for (std::size_t n = 0; n < dim; ++n) {
    for (std::size_t m = 0; m < dim; ++m) dense[n * dim + m] = element(n, m);
  }
  return dense;
}

std::vector<double> amplified_number_distribution(const AmplifierParams& params,
                                                  const CoherentInput& input,
                                                  double t, std::size_t max_n) {
  input.validate();
  if (!(t >= 0.0)) throw_invalid("time must be nonnegative");
  const double g = gain(params, t);
  const double coherent = g * input.amplitude_sq;
  const double thermal = params.noise_ratio() * std::expm1(params.log_gain(t));
  std::vector<double> p(max_n + 1);

  if (thermal < 1e-12) {
    const double log_c = std::log(coherent);
    for (std::size_t n = 0; n <= max_n; ++n) {
      const double nn = static_cast<double>(n);
      p[n] = std::exp(-coherent + nn * log_c - std::lgamma(nn + 1.0));
    }
    return p;
  }

  // P(n) = q^n/(1+nbar) exp(-B/(1+nbar)) L_n(-x), q = nbar/(1+nbar),
  // x = B/(nbar(1+nbar)). L_n(-x) > 0 grows along the forward recurrence,
  // which is the stable direction; it is carried as value * exp(log_scale).
  const double log_q = std::log(thermal) - std::log1p(thermal);
  const double log_front = -std::log1p(thermal) - coherent / (1.0 + thermal);
  const double x = coherent / (thermal * (1.0 + thermal));
  double prev = 0.0;
  double cur = 1.0;
  double log_scale = 0.0;
  for (std::size_t n = 0; n <= max_n; ++n) {
    const double nn = static_cast<double>(n);
    p[n] = std::exp(log_front + nn * log_q + std::log(cur) + log_scale);
    const double next = ((2.0 * nn + 1.0 + x) * cur - nn * prev) / (nn + 1.0);
    prev = cur;
    cur = next;
    if (cur > 1e200) {
      prev *= 1e-200;
      cur *= 1e-200;
      log_scale += 200.0 * std::log(10.0);
    }
  }
  return p;
}

namespace {

std::size_t tail_cutoff(const std::vector<double>& p, double tol) {
  std::size_t s = p.size() - 1;
  double tail_above = 0.0;
  while (s > 0 && tail_above + p[s] < tol) {
    tail_above += p[s];
    --s;
  }
  return std::max<std::size_t>(s, 1);
}

std::size_t search_bound(double coherent, double thermal) {
  const double mean = coherent + thermal;
  const double var = thermal * (thermal + 1.0) + coherent * (2.0 * thermal + 1.0);
  return static_cast<std::size_t>(std::ceil(mean + 60.0 * std::sqrt(var) + 60.0));
}

}  // namespace

std::size_t fock_cutoff(const AmplifierParams& params, const CoherentInput& input,
                        double t, double tail_tolerance) {
  input.validate();
  if (!(tail_tolerance > 0.0 && tail_tolerance < 1.0)) {
    throw_invalid("tail tolerance must lie in (0, 1)");
  }
  const double thermal = params.noise_ratio() * std::expm1(params.log_gain(t));
  const double coherent = gain(params, t) * input.amplitude_sq;
  const auto at_t = amplified_number_distribution(params, input, t,
                                                  search_bound(coherent, thermal));
  const auto at_0 = amplified_number_distribution(params, input, 0.0,
                                                  search_bound(input.amplitude_sq, 0.0));
  return std::max(tail_cutoff(at_t, tail_tolerance), tail_cutoff(at_0, tail_tolerance));
}

MasterEquationSolver::MasterEquationSolver(const AmplifierParams& params,
                                           const CoherentInput& input,
                                           std::size_t cutoff,
                                           const MasterEquationOptions& options)
    : params_(params),
      theta_(input.theta),
      cutoff_(cutoff),
      band_limit_(std::min(options.band_limit, cutoff)),
      top_limit_(options.top_population_limit) {
  input.validate();
  if (cutoff < 1) throw_invalid("Fock cutoff must be at least 1");

  sqrt_n_.resize(cutoff_ + 2);
  for (std::size_t n = 0; n < sqrt_n_.size(); ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));

  offset_.resize(band_limit_ + 2);
  offset_[0] = 0;
  for (std::size_t d = 0; d <= band_limit_; ++d) offset_[d + 1] = offset_[d] + (cutoff_ + 1 - d);
  y_.assign(offset_.back(), 0.0);

  const FockState initial = FockState::coherent(input, cutoff_, band_limit_);
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    const complex unphase = std::polar(1.0, static_cast<double>(d) * theta_);
    const auto& band = initial.band(d);
    for (std::size_t n = 0; n < band.size(); ++n) y_[offset_[d] + n] = (band[n] * unphase).real();
  }
  k1_.resize(y_.size());
  k2_.resize(y_.size());
  k3_.resize(y_.size());
  k4_.resize(y_.size());
  tmp_.resize(y_.size());

  // Step bound h * lambda <= 1.25 with lambda the largest diagonal (plus
  // Gershgorin radius when kappa_down > 0). The blocks are strongly
  // non-normal, so the usual RK4 real-axis limit of 2.78 is not enough.
  const double kup = params_.kappa_up();
  const double kdown = params_.kappa_down();
  const double s = static_cast<double>(cutoff_);
  double lambda = 0.0;
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    const double dd = static_cast<double>(d);
    for (std::size_t n = 0; n + d <= cutoff_; ++n) {
      const double nn = static_cast<double>(n);
      const double m = nn + dd;
      const double an = nn < s ? nn + 1.0 : 0.0;
      const double am = m < s ? m + 1.0 : 0.0;
      double row = 0.5 * (kdown * (nn + m) + kup * (an + am));
      if (kdown > 0.0) {
        row += kup * std::sqrt(nn * m);
        if (m + 1.0 <= s) row += kdown * std::sqrt((nn + 1.0) * (m + 1.0));
      }
      lambda = std::max(lambda, row);
    }
  }
  const double requested = options.dt > 0.0 ? options.dt : 1e-3 / kup;
  max_step_ = lambda > 0.0 ? std::min(requested, kStepFactor / lambda) : requested;
}

void MasterEquationSolver::derivative(const std::vector<double>& y,
                                      std::vector<double>& out) const {
  const double kup = params_.kappa_up();
  const double kdown = params_.kappa_down();
  const std::size_t s = cutoff_;
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    const double* yb = y.data() + offset_[d];
    double* ob = out.data() + offset_[d];
    const std::size_t len = s + 1 - d;
    for (std::size_t n = 0; n < len; ++n) {
      const std::size_t m = n + d;
      const double an = n < s ? static_cast<double>(n + 1) : 0.0;
      const double am = m < s ? static_cast<double>(m + 1) : 0.0;
      double v = -0.5 * (kdown * static_cast<double>(n + m) + kup * (an + am)) * yb[n];
      if (n > 0) v += kup * sqrt_n_[n] * sqrt_n_[m] * yb[n - 1];
      if (n + 1 < len) v += kdown * sqrt_n_[n + 1] * sqrt_n_[m + 1] * yb[n + 1];
      ob[n] = v;
    }
  }
}

void MasterEquationSolver::advance_to(double t) {
  if (!(t >= time_)) throw_invalid("master equation cannot run backwards");
  const double span = t - time_;
  if (span == 0.0) return;
  const auto n = static_cast<std::size_t>(std::ceil(span / max_step_ - 1e-9));
  const double h = span / static_cast<double>(std::max<std::size_t>(n, 1));
  const std::size_t size = y_.size();
  for (std::size_t step = 0; step < std::max<std::size_t>(n, 1); ++step) {
    derivative(y_, k1_);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y_[i] + 0.5 * h * k1_[i];
    derivative(tmp_, k2_);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y_[i] + 0.5 * h * k2_[i];
    derivative(tmp_, k3_);
    for (std::size_t i = 0; i < size; ++i) tmp_[i] = y_[i] + h * k3_[i];
    derivative(tmp_, k4_);
    for (std::size_t i = 0; i < size; ++i) {
      y_[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
    ++steps_;
  }
  time_ = t;
  const double top = top_population();
  if (!(top <= top_limit_)) {
    std::ostringstream msg;
    msg << "top Fock population " << top << " at cutoff " << cutoff_
        << " exceeds " << top_limit_ << "; increase the cutoff";
    throw_guard(msg.str());
  }
}

double MasterEquationSolver::top_population() const { return y_[offset_[0] + cutoff_]; }

FockState MasterEquationSolver::state() const {
  FockState out(cutoff_, band_limit_);
  for (std::size_t d = 0; d <= band_limit_; ++d) {
    const complex phase = std::polar(1.0, -static_cast<double>(d) * theta_);
    auto& band = out.band(d);
    for (std::size_t n = 0; n < band.size(); ++n) band[n] = y_[offset_[d] + n] * phase;
  }
  return out;
}

FockState evolve_density(const AmplifierParams& params, const CoherentInput& input,
                         std::size_t cutoff, double t, double dt,
                         std::size_t band_limit) {
  MasterEquationOptions options;
  options.dt = dt;
  options.band_limit = band_limit;
  MasterEquationSolver solver(params, input, cutoff, options);
  solver.advance_to(t);
  return solver.state();
}

StepRefinementReport step_refinement_check(const AmplifierParams& params,
                                           const CoherentInput& input,
                                           std::size_t cutoff, double t, double dt,
                                           std::size_t band_limit) {
  MasterEquationOptions coarse_options;
  coarse_options.dt = dt;
  coarse_options.band_limit = band_limit;
  MasterEquationSolver coarse(params, input, cutoff, coarse_options);
  MasterEquationOptions fine_options = coarse_options;
  fine_options.dt = 0.5 * coarse.max_step();
  MasterEquationSolver fine(params, input, cutoff, fine_options);
  coarse.advance_to(t);
  fine.advance_to(t);

  StepRefinementReport report;
  report.step = coarse.max_step();
  const FockState a = coarse.state();
  const FockState b = fine.state();
  for (std::size_t n = 0; n <= cutoff; ++n) {
    report.max_population_difference =
        std::max(report.max_population_difference, std::abs(a.population(n) - b.population(n)));
  }
  const auto sa = a.band_sums();
  const auto sb = b.band_sums();
  for (std::size_t d = 0; d < sa.size(); ++d) {
    report.max_band_sum_difference =
        std::max(report.max_band_sum_difference, std::abs(sa[d] - sb[d]));
  }
  return report;
}

}  // namespace phasediff
