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

#include "phasediff/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "phasediff/error.hpp"

namespace phasediff {

void SdeConfig::validate() const {
  if (!std::isfinite(dt) || !(dt > 0.0)) throw_invalid("dt must be > 0");
  if (!std::isfinite(t_max) || t_max < dt) throw_invalid("t_max must be >= dt");
  if (n_traj < 1) throw_invalid("n_traj must be >= 1");
  if (!std::isfinite(floor_epsilon) || !(floor_epsilon > 0.0)) {
    throw_invalid("floor_epsilon must be > 0");
  }
  if (max_guard_hits < 0) throw_invalid("max_guard_hits must be >= 0");
  if (record_stride < 1) throw_invalid("record_stride must be >= 1");
}

std::size_t SdeConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(t_max / dt));
}

const char* variable_name(Variable v) {
  switch (v) {
    case Variable::N: return "N";
    case Variable::Phi: return "Phi";
    case Variable::Upsilon: return "Upsilon";
  }
  return "?";
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GaussianStream::GaussianStream(std::uint64_t seed) : engine_(seed) {}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double kScale = 0x1.0p-53;
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::span<const double> TrajectoryEnsemble::path(Variable v, std::size_t traj) const {
  const auto& d = data(v);
  if (d.empty()) throw_invalid(std::string("ensemble has no ") + variable_name(v) + " paths");
  if (traj >= n_traj()) throw_invalid("trajectory index out of range");
  return {d.data() + traj * n_times(), n_times()};
}

double TrajectoryEnsemble::value(Variable v, std::size_t traj, std::size_t k) const {
  if (k >= n_times()) throw_invalid("time index out of range");
  return path(v, traj)[k];
}

std::size_t TrajectoryEnsemble::n_aborted() const noexcept {
  return static_cast<std::size_t>(std::count(aborted_.begin(), aborted_.end(), 1));
}

std::vector<std::size_t> TrajectoryEnsemble::aborted_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < aborted_.size(); ++i) {
    if (aborted_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> TrajectoryEnsemble::flagged_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < guard_hits_.size(); ++i) {
    if (guard_hits_[i] > 0) out.push_back(i);
  }
  return out;
}

std::size_t TrajectoryEnsemble::total_guard_hits() const noexcept {
  std::size_t total = 0;
  for (int h : guard_hits_) total += static_cast<std::size_t>(h);
  return total;
}

const std::vector<double>& TrajectoryEnsemble::data(Variable v) const noexcept {
  switch (v) {
    case Variable::N: return n_;
    case Variable::Phi: return phi_;
    case Variable::Upsilon: return upsilon_;
  }
  return n_;
}

// Owns the storage while workers fill disjoint trajectory rows.
class EnsembleBuilder {
 public:
  EnsembleBuilder(const SdeConfig& config, bool polar) : config_(config) {
    config.validate();
    const std::size_t steps = config.n_steps();
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k % config.record_stride == 0 || k == steps) {
        record_steps_.push_back(k);
        ens_.times_.push_back(static_cast<double>(k) * config.dt);
      }
    }
    const std::size_t cells = config.n_traj * ens_.times_.size();
    if (polar) {
      ens_.n_.assign(cells, 0.0);
      ens_.phi_.assign(cells, 0.0);
    } else {
      ens_.upsilon_.assign(cells, 0.0);
    }
    ens_.seeds_.resize(config.n_traj);
    for (std::size_t i = 0; i < config.n_traj; ++i) {
      ens_.seeds_[i] = derive_stream_seed(config.master_seed, i);
    }
    ens_.guard_hits_.assign(config.n_traj, 0);
    ens_.aborted_.assign(config.n_traj, 0);
  }

  // step(state, gaussian) advances one trajectory by dt and returns false
  // when the guard trips; record(state, row, slot) stores it.
  template <typename State, typename Step, typename Record>
  void run(const State& initial, Step step, Record record) {
    const std::size_t n_traj = config_.n_traj;
    unsigned workers = config_.threads == 0 ? std::thread::hardware_concurrency()
                                            : config_.threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_traj)));

    auto simulate_range = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        GaussianStream rng(ens_.seeds_[i]);
        State state = initial;
        int hits = 0;
        bool aborted = false;
        std::size_t slot = 0;
        const std::size_t steps = record_steps_.back();
        for (std::size_t k = 0; k <= steps; ++k) {
          if (k > 0 && !aborted) {
            const double dv_n = rng.next();
            const double dv_phi = rng.next();
            if (!step(state, dv_n, dv_phi)) {
              ++hits;
              if (hits > config_.max_guard_hits) aborted = true;
            }
          }
          if (slot < record_steps_.size() && record_steps_[slot] == k) {
            record(state, i, slot);
            ++slot;
          }
        }
        ens_.guard_hits_[i] = hits;
        ens_.aborted_[i] = aborted ? 1 : 0;
      }
    };

    if (workers == 1) {
      simulate_range(0, n_traj);
      return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_traj + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_traj, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(simulate_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  TrajectoryEnsemble& ensemble() { return ens_; }
  std::size_t n_times() const { return ens_.times_.size(); }

  double* row(std::vector<double> TrajectoryEnsemble::*member, std::size_t traj) {
    return (ens_.*member).data() + traj * n_times();
  }
  static constexpr auto kN = &TrajectoryEnsemble::n_;
  static constexpr auto kPhi = &TrajectoryEnsemble::phi_;
  static constexpr auto kUpsilon = &TrajectoryEnsemble::upsilon_;

 private:
  SdeConfig config_;
  std::vector<std::size_t> record_steps_;
  TrajectoryEnsemble ens_;
};

namespace {

struct PolarState {
  double n;
  double phi;
};

}  // namespace

TrajectoryEnsemble simulate_polar(const AmplifierParams& params,
                                  const CoherentInput& input,
                                  const SdeConfig& config) {
  input.validate();
  EnsembleBuilder builder(config, /*polar=*/true);
  const double sqrt_dt = std::sqrt(config.dt);
  const double dt = config.dt;
  const double kup = params.kappa_up();
  const double kminus = params.kappa_minus();
  const double floor = config.floor_epsilon;

  auto step = [=](PolarState& s, double dv_n, double dv_phi) {
    // Ito: both increments use the state at the start of the step.
    const double phi = s.phi + std::sqrt(kup / (2.0 * s.n)) * sqrt_dt * dv_phi;
    double n = s.n + (kup + kminus * s.n) * dt + std::sqrt(2.0 * kup * s.n) * sqrt_dt * dv_n;
    bool ok = true;
    if (!(n >= floor) || !std::isfinite(n)) {
      n = floor;
      ok = false;
    }
    s.n = n;
    s.phi = phi;
    return ok;
  };
  auto record = [&builder](const PolarState& s, std::size_t traj, std::size_t slot) {
    builder.row(EnsembleBuilder::kN, traj)[slot] = s.n;
    builder.row(EnsembleBuilder::kPhi, traj)[slot] = s.phi;
  };
  builder.run(PolarState{input.amplitude_sq, input.theta}, step, record);
  return std::move(builder.ensemble());
}

TrajectoryEnsemble simulate_inverse(const AmplifierParams& params,
                                    const CoherentInput& input,
                                    const SdeConfig& config) {
  input.validate_for_expansion();
  EnsembleBuilder builder(config, /*polar=*/false);
  const double sqrt_dt = std::sqrt(config.dt);
  const double dt = config.dt;
  const double kup = params.kappa_up();
  const double kminus = params.kappa_minus();
  const double ceiling = 1.0 / config.floor_epsilon;
  const double floor = config.floor_epsilon;
  const double diffusion = std::sqrt(2.0 * kup);

  auto step = [=](double& u, double dv_n, double /*dv_phi*/) {
    // U^2 sqrt(2 kappa_up / U) = sqrt(2 kappa_up) U^{3/2}
    double next = u - (kminus * u - kup * u * u) * dt - diffusion * u * std::sqrt(u) * sqrt_dt * dv_n;
    bool ok = true;
    if (!std::isfinite(next) || next > ceiling) {
      next = ceiling;
      ok = false;
    } else if (!(next > 0.0)) {
      next = floor;
      ok = false;
    }
    u = next;
    return ok;
  };
  auto record = [&builder](const double& u, std::size_t traj, std::size_t slot) {
    builder.row(EnsembleBuilder::kUpsilon, traj)[slot] = u;
  };
  builder.run(1.0 / input.amplitude_sq, step, record);
  return std::move(builder.ensemble());
}

SampleStats sample_stats(std::span<const double> samples) {
  if (samples.size() < 2) throw_invalid("sample statistics need at least two samples");
  SampleStats s;
  s.count = samples.size();
  const double n = static_cast<double>(s.count);
  // Deviations are taken about the first sample, then about the mean, so
  // identical samples give exactly zero spread.
  const double shift = samples[0];
  double sum = 0.0;
  for (double x : samples) sum += x - shift;
  const double offset = sum / n;
  s.mean = shift + offset;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : samples) {
    const double d = (x - shift) - offset;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  s.variance = m2 / (n - 1.0);
  s.se_mean = std::sqrt(s.variance / n);
  m4 /= n;
  // Var(s^2) ~ (mu_4 - (n-3)/(n-1) sigma^4) / n
  const double var_of_var = (m4 - (n - 3.0) / (n - 1.0) * s.variance * s.variance) / n;
  s.se_variance = std::sqrt(std::max(0.0, var_of_var));
  return s;
}

TimeSeriesStats ensemble_stats(const TrajectoryEnsemble& ensemble, Variable v,
                               const std::function<double(double)>& transform) {
  if (!ensemble.has(v)) {
    throw_invalid(std::string("ensemble has no ") + variable_name(v) + " paths");
  }
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < ensemble.n_traj(); ++i) {
    if (!ensemble.aborted(i)) alive.push_back(i);
  }
  if (alive.size() < 2) {
    throw_guard("fewer than two trajectories survived the positivity guard");
  }
  TimeSeriesStats out;
  out.times = ensemble.times();
  out.count = alive.size();
  const std::size_t nt = ensemble.n_times();
  out.mean.resize(nt);
  out.variance.resize(nt);
  out.se_mean.resize(nt);
  out.se_variance.resize(nt);
  std::vector<double> column(alive.size());
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 0; j < alive.size(); ++j) {
      const double x = ensemble.value(v, alive[j], k);
      column[j] = transform ? transform(x) : x;
    }
    const SampleStats s = sample_stats(column);
    out.mean[k] = s.mean;
    out.variance[k] = s.variance;
    out.se_mean[k] = s.se_mean;
    out.se_variance[k] = s.se_variance;
  }
  return out;
}

}  // namespace phasediff
