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

#include "phasediff/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <system_error>

namespace phasediff {

namespace {

constexpr int kMaxExpansionOrder = 16;
constexpr std::size_t kMaxThreads = 1024;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class T>
std::optional<T> parse_unsigned(std::string_view s) {
  T v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string format_rates(const std::vector<RatePair>& rates) {
  std::string out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out += ", ";
    out += format_double(rates[i].kappa_up) + ":" + format_double(rates[i].kappa_down);
  }
  return out;
}

// Experiment defaults are the reference parameter set of each experiment.
ExperimentConfig defaults_for(std::string_view name) {
  ExperimentConfig c;
  c.experiment = std::string(name);
  constexpr double pi = std::numbers::pi;
  if (name == "number-fan") {
    c.kappa_up = 2.0;
    c.amplitude_sq = {3.0};
    c.t_end = 2.0;
    c.n_traj = 50;
    c.paths_kept = 50;
  } else if (name == "variance-compare") {
    c.kappa_up = 1.0;
    c.amplitude_sq = {2.25, 13.0};
    c.theta = pi;
    c.k_order = 4;
    c.t_end = 5.0;
    c.n_traj = 500;
  } else if (name == "snr-input") {
    c.kappa_up = 1.0;
    c.amplitude_sq = {2.0, 3.0, 6.0, 13.0};
    c.t_end = 5.0;
  } else if (name == "snr-nonideal") {
    c.amplitude_sq = {3.0};
    c.rates = {{0.6, 0.4}, {0.7, 0.3}, {0.8, 0.2}, {1.0, 0.0}};
    c.t_end = 5.0;
  } else if (name == "inverse-expansion") {
    c.kappa_up = 2.0;
    c.amplitude_sq = {3.0};
    c.k_order = 3;
    c.t_end = 2.0;
    c.n_traj = 200;
    c.paths_kept = 5;
  } else if (name == "dist-converge") {
    c.kappa_up = 1.0;
    c.amplitude_sq = {2.25};
    c.theta = pi;
    c.snapshot_times = {0.1, 4.0};
  } else if (name == "variance-from-dist") {
    c.kappa_up = 1.0;
    c.amplitude_sq = {2.25};
    c.theta = pi;
    c.t_start = 0.1;
    c.t_end = 4.0;
    c.time_points = 40;
  }
  return c;
}

class Validator {
 public:
  explicit Validator(std::vector<FieldError>& errors) : errors_(errors) {}

  void fail(const std::string& field, const std::string& message) {
    errors_.push_back({field, message});
  }

  void number(const std::string& key, const std::string& v, double& out) {
    if (auto d = parse_double(v)) {
      out = *d;
    } else {
      fail(key, "expected a finite number, got '" + v + "'");
    }
  }

  template <class T>
  void count(const std::string& key, const std::string& v, T& out) {
    if (auto n = parse_unsigned<T>(v)) {
      out = *n;
    } else {
      fail(key, "expected a nonnegative integer, got '" + v + "'");
    }
  }

  void list(const std::string& key, const std::string& v, std::vector<double>& out) {
    out.clear();
    if (trim(v).empty()) return;
    for (const auto& item : split(v, ',')) {
      if (auto d = parse_double(item)) {
        out.push_back(*d);
      } else {
        fail(key, "expected a comma-separated list of numbers, got '" + item + "'");
        return;
      }
    }
  }

  void rates(const std::string& key, const std::string& v, std::vector<RatePair>& out) {
    out.clear();
    if (trim(v).empty()) return;
    for (const auto& item : split(v, ',')) {
      const auto parts = split(item, ':');
      std::optional<double> up, down;
      if (parts.size() == 2) {
        up = parse_double(parts[0]);
        down = parse_double(parts[1]);
      }
      if (!up || !down) {
        fail(key, "expected kappa_up:kappa_down pairs, got '" + item + "'");
        return;
      }
      out.push_back({*up, *down});
    }
  }

 private:
  std::vector<FieldError>& errors_;
};

void check_rates(Validator& v, const std::string& field, double up, double down) {
  if (!(up > 0.0)) v.fail(field, "kappa_up must be > 0");
  if (!(down >= 0.0)) v.fail(field, "kappa_down must be >= 0");
  if (!(up - down > 0.0)) {
    v.fail(field, "kappa_minus = kappa_up - kappa_down must be > 0 (amplifying regime)");
  }
}

void check_semantics(const ExperimentInfo& info, ExperimentConfig& c, Validator& v) {
  check_rates(v, "kappa_up/kappa_down", c.kappa_up, c.kappa_down);

  if (c.amplitude_sq.empty()) v.fail("amplitude_sq", "at least one value is required");
  for (double a : c.amplitude_sq) {
    if (!(a > 0.0)) {
      v.fail("amplitude_sq", "every value must be > 0, got " + format_double(a));
    } else if (info.uses_expansion && !(a > 1.0)) {
      v.fail("amplitude_sq",
             "value " + format_double(a) +
                 " violates the >1 rule: realisations of N(0) must be greater than "
                 "one photon for the inverse-number expansion to converge");
    }
  }
  const bool single_amplitude = c.experiment == "number-fan" || c.experiment == "snr-nonideal" ||
                                c.experiment == "inverse-expansion" || info.uses_density;
  if (single_amplitude && c.amplitude_sq.size() > 1) {
    v.fail("amplitude_sq", c.experiment + " takes exactly one value");
  }

  if (c.experiment == "snr-nonideal") {
    if (c.rates.empty()) v.fail("rates", "at least one kappa_up:kappa_down pair is required");
    for (const auto& r : c.rates) check_rates(v, "rates", r.kappa_up, r.kappa_down);
    if (!(c.sweep_max > 0.0)) v.fail("sweep_max", "must be > 0");
    if (c.sweep_points < 2) v.fail("sweep_points", "must be >= 2");
  }

  if (c.k_order < 1 || c.k_order > kMaxExpansionOrder) {
    v.fail("k_order", "must lie in 1.." + std::to_string(kMaxExpansionOrder));
  }

  if (!(c.t_start >= 0.0)) v.fail("t_start", "must be >= 0");
  if (!(c.t_end > c.t_start)) v.fail("t_end", "must be > t_start");
  if (c.time_points < 2) v.fail("time_points", "must be >= 2");

  if (info.stochastic) {
    if (c.t_start != 0.0) v.fail("t_start", "trajectory experiments start at t = 0");
    if (!(c.dt > 0.0)) {
      v.fail("dt", "must be > 0");
    } else if (c.t_end > c.t_start && c.time_points >= 2) {
      const double steps = c.t_end / c.dt;
      const double rounded = std::round(steps);
      if (std::fabs(steps - rounded) > 1e-9 * rounded || rounded < 1.0) {
        v.fail("dt", "t_end must be an integer multiple of dt");
      } else if (static_cast<std::size_t>(rounded) % (c.time_points - 1) != 0) {
        v.fail("time_points", "time_points - 1 must divide the step count t_end/dt = " +
                                  format_double(rounded));
      }
    }
    if (c.n_traj < 2) v.fail("n_traj", "must be >= 2 (standard errors need two samples)");
    if (!(c.floor_epsilon > 0.0)) v.fail("floor_epsilon", "must be > 0");
    if (c.max_guard_hits < 0) v.fail("max_guard_hits", "must be >= 0");
    if (!(c.max_abort_fraction >= 0.0 && c.max_abort_fraction <= 1.0)) {
      v.fail("max_abort_fraction", "must lie in [0, 1]");
    }
  }
  if (c.threads > kMaxThreads) v.fail("threads", "must be <= " + std::to_string(kMaxThreads));

  if (info.uses_density) {
    if (c.kappa_down != 0.0) {
      v.fail("kappa_down", "the P-function phase density is closed form only for kappa_down = 0");
    }
    if (c.band_limit < 1) v.fail("band_limit", "must be >= 1");
    if (c.phase_points < 8) v.fail("phase_points", "must be >= 8");
  }
  if (c.experiment == "dist-converge") {
    if (c.snapshot_times.empty()) v.fail("snapshot_times", "at least one time is required");
    for (double t : c.snapshot_times) {
      if (!(t > 0.0)) v.fail("snapshot_times", "every time must be > 0 (the P density is singular at t = 0)");
    }
  }
  if (c.experiment == "variance-from-dist" && !(c.t_start > 0.0)) {
    v.fail("t_start", "must be > 0 (the P density is singular at t = 0)");
  }
}

using Setter = void (*)(Validator&, const std::string&, const std::string&, ExperimentConfig&);

struct KeyRule {
  const char* key;
  Setter set;
  std::string (*get)(const ExperimentConfig&);
};

#define PD_NUMBER(name)                                                                    \
  KeyRule{#name,                                                                           \
          [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) { \
            v.number(k, s, c.name);                                                        \
          },                                                                               \
          [](const ExperimentConfig& c) { return format_double(c.name); }}
#define PD_COUNT(name)                                                                     \
  KeyRule{#name,                                                                           \
          [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) { \
            v.count(k, s, c.name);                                                         \
          },                                                                               \
          [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define PD_LIST(name)                                                                      \
  KeyRule{#name,                                                                           \
          [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) { \
            v.list(k, s, c.name);                                                          \
          },                                                                               \
          [](const ExperimentConfig& c) { return format_list(c.name); }}

const std::vector<KeyRule>& key_rules() {
  static const std::vector<KeyRule> rules = {
      KeyRule{"experiment",
              [](Validator&, const std::string&, const std::string& s, ExperimentConfig& c) {
                c.experiment = s;
              },
              [](const ExperimentConfig& c) { return c.experiment; }},
      PD_COUNT(seed),
      PD_NUMBER(kappa_up),
      PD_NUMBER(kappa_down),
      PD_LIST(amplitude_sq),
      PD_NUMBER(theta),
      KeyRule{"rates",
              [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) {
                v.rates(k, s, c.rates);
              },
              [](const ExperimentConfig& c) { return format_rates(c.rates); }},
      KeyRule{"k_order",
              [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) {
                unsigned n = 0;
                v.count(k, s, n);
                c.k_order = n > static_cast<unsigned>(kMaxExpansionOrder) ? kMaxExpansionOrder + 1
                                                                          : static_cast<int>(n);
              },
              [](const ExperimentConfig& c) { return std::to_string(c.k_order); }},
      PD_NUMBER(t_start),
      PD_NUMBER(t_end),
      PD_COUNT(time_points),
      PD_NUMBER(dt),
      PD_COUNT(n_traj),
      PD_COUNT(threads),
      PD_NUMBER(floor_epsilon),
      KeyRule{"max_guard_hits",
              [](Validator& v, const std::string& k, const std::string& s, ExperimentConfig& c) {
                unsigned n = 0;
                v.count(k, s, n);
                c.max_guard_hits = static_cast<int>(std::min<unsigned>(n, 1u << 30));
              },
              [](const ExperimentConfig& c) { return std::to_string(c.max_guard_hits); }},
      PD_NUMBER(max_abort_fraction),
      PD_COUNT(paths_kept),
      PD_LIST(snapshot_times),
      PD_COUNT(phase_points),
      PD_COUNT(band_limit),
      PD_COUNT(cutoff),
      PD_NUMBER(sweep_max),
      PD_COUNT(sweep_points),
  };
  return rules;
}

#undef PD_NUMBER
#undef PD_COUNT
#undef PD_LIST

const KeyRule* find_key(std::string_view key) {
  for (const auto& rule : key_rules()) {
    if (key == rule.key) return &rule;
  }
  return nullptr;
}

}  // namespace

const std::vector<ExperimentInfo>& registered_experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"number-fan", "photon-number trajectories and their ensemble mean", true, false, false},
      {"variance-compare",
       "phase variance: sample vs inverse-number expansion (orders K and 1) vs small-noise",
       true, true, false},
      {"snr-input", "inverse signal-to-noise ratio for several input strengths", false, false,
       false},
      {"snr-nonideal",
       "inverse signal-to-noise ratio for non-ideal rates, in time and at large gain", false,
       false, false},
      {"inverse-expansion", "inverse photon number: trajectories vs the expansion at orders 1..K",
       true, true, false},
      {"dist-converge", "P-function and Pegg-Barnett phase densities at snapshot times", false,
       false, true},
      {"variance-from-dist", "phase variance of the P-function and Pegg-Barnett densities",
       false, false, true},
  };
  return list;
}

const ExperimentInfo* find_experiment(std::string_view name) {
  for (const auto& info : registered_experiments()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

std::vector<double> ExperimentConfig::time_grid() const {
  std::vector<double> out(time_points);
  const double span = t_end - t_start;
  const double last = static_cast<double>(time_points - 1);
  for (std::size_t k = 0; k < time_points; ++k) {
    out[k] = k + 1 == time_points ? t_end : t_start + span * static_cast<double>(k) / last;
  }
  return out;
}

std::size_t ExperimentConfig::record_stride() const {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  return std::max<std::size_t>(1, steps / (time_points - 1));
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& rule : key_rules()) out.emplace_back(rule.key);
    return out;
  }();
  return keys;
}

ValidationResult validate_config(std::string_view text, const ConfigOverrides& overrides) {
  ValidationResult result;
  Validator v(result.errors);

  // Raw values in application order: file lines first, then overrides.
  std::map<std::string, std::string> values;
  std::set<std::string> from_file;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos) {
      v.fail(where, "expected 'key = value', got '" + body + "'");
      continue;
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!find_key(key)) {
      v.fail(key.empty() ? where : key, "unknown key (" + where + ")");
      continue;
    }
    if (!from_file.insert(key).second) {
      v.fail(key, "duplicate key (" + where + ")");
      continue;
    }
    values[key] = value;
  }
  for (const auto& [key, value] : overrides) {
    if (!find_key(key)) {
      v.fail(key, "unknown key (override)");
      continue;
    }
    values[key] = trim(value);
  }

  const bool has_seed = values.find("seed") != values.end();
  const auto exp_it = values.find("experiment");
  if (exp_it == values.end() || exp_it->second.empty()) {
    v.fail("experiment", "required field is missing");
    if (!has_seed) v.fail("seed", "required field is missing");
    return result;
  }
  const ExperimentInfo* info = find_experiment(exp_it->second);
  if (!info) {
    std::string known;
    for (const auto& e : registered_experiments()) known += (known.empty() ? "" : ", ") + e.name;
    v.fail("experiment", "unknown experiment '" + exp_it->second + "' (known: " + known + ")");
    if (!has_seed) v.fail("seed", "required field is missing");
    return result;
  }
  if (!has_seed) v.fail("seed", "required field is missing");

  result.config = defaults_for(info->name);
  for (const auto& rule : key_rules()) {
    const auto it = values.find(rule.key);
    if (it != values.end()) rule.set(v, rule.key, it->second, result.config);
  }
  check_semantics(*info, result.config, v);
  return result;
}

std::string echo_config(const ExperimentConfig& config) {
  std::ostringstream out;
  for (const auto& rule : key_rules()) {
    const std::string value = rule.get(config);
    out << rule.key << (value.empty() ? " =" : " = ") << value << '\n';
  }
  return out.str();
}

}  // namespace phasediff
