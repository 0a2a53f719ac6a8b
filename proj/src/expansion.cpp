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

#include "phasediff/expansion.hpp"

#include <cmath>
#include <string>

#include "phasediff/error.hpp"

namespace phasediff {
namespace {

void check_order(int order) {
  if (order < 1) throw_invalid("expansion order K must be >= 1");
}

void check_time(double t) {
  if (!std::isfinite(t) || t < 0.0) throw_invalid("time must be finite and >= 0");
}

double rate_b(const AmplifierParams& p, int n) { return -n * p.kappa_minus(); }
double rate_c(const AmplifierParams& p, int n) {
  return static_cast<double>(n) * n * p.kappa_up();
}

std::size_t idx(int order, int row, int col) {
  return static_cast<std::size_t>((row - 1) * order + (col - 1));
}

// Row-major product of two K x K matrices.
std::vector<double> matmul(const std::vector<double>& x, const std::vector<double>& y,
                           int k) {
  std::vector<double> out(static_cast<std::size_t>(k * k), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int l = 0; l < k; ++l) {
      const double xil = x[static_cast<std::size_t>(i * k + l)];
      if (xil == 0.0) continue;
      for (int j = 0; j < k; ++j) {
        out[static_cast<std::size_t>(i * k + j)] += xil * y[static_cast<std::size_t>(l * k + j)];
      }
    }
  }
  return out;
}

// Orders from which beta is assembled from logarithms. Below it the direct
// products are exact to a few ulps and cannot overflow.
constexpr int kLogSpaceOrder = 10;

}  // namespace

ExpansionTable::ExpansionTable(const AmplifierParams& params, int order)
    : params_(params), order_(order) {
  check_order(order);
  const auto k_sz = static_cast<std::size_t>(order);
  b_.resize(k_sz);
  c_.resize(k_sz);
  for (int n = 1; n <= order; ++n) {
    b_[static_cast<std::size_t>(n - 1)] = rate_b(params, n);
    c_[static_cast<std::size_t>(n - 1)] = rate_c(params, n);
  }

  beta_.assign(k_sz * k_sz, 0.0);
  beta_[0] = 1.0;
  double numerator = 1.0;      // c_1 ... c_{n-1}
  double log_numerator = 0.0;  // its log, used once the products get large
  for (int n = 2; n <= order; ++n) {
    numerator *= c_[static_cast<std::size_t>(n - 2)];
    log_numerator += std::log(c_[static_cast<std::size_t>(n - 2)]);
    for (int k = 1; k <= n; ++k) {
      const double bk = b_[static_cast<std::size_t>(k - 1)];
      if (n < kLogSpaceOrder) {
        double denominator = 1.0;
        for (int j = 1; j <= n; ++j) {
          if (j != k) denominator *= bk - b_[static_cast<std::size_t>(j - 1)];
        }
        beta_[idx(order, n, k)] = numerator / denominator;
        continue;
      }
      double log_denominator = 0.0;
      bool negative = false;
      for (int j = 1; j <= n; ++j) {
        if (j == k) continue;
        const double diff = bk - b_[static_cast<std::size_t>(j - 1)];
        log_denominator += std::log(std::fabs(diff));
        if (diff < 0.0) negative = !negative;
      }
      const double magnitude = std::exp(log_numerator - log_denominator);
      beta_[idx(order, n, k)] = negative ? -magnitude : magnitude;
    }
  }
}

void ExpansionTable::check_index(int n) const {
  if (n < 1 || n > order_) {
    throw_invalid("expansion index " + std::to_string(n) + " outside 1.." +
                  std::to_string(order_));
  }
}

double ExpansionTable::b(int n) const {
  check_index(n);
  return b_[static_cast<std::size_t>(n - 1)];
}

double ExpansionTable::c(int n) const {
  check_index(n);
  return c_[static_cast<std::size_t>(n - 1)];
}

double ExpansionTable::beta(int k, int n) const {
  check_index(n);
  check_index(k);
  if (k > n) return 0.0;
  return beta_[idx(order_, n, k)];
}

double ExpansionTable::g(int n, double t) const {
  check_index(n);
  check_time(t);
  // sum_k beta_k = delta_{n,1}, so g_n = delta_{n,1} + sum_k beta_k expm1(b_k t)
  // keeps the O(t^{n-1}) small-time behaviour out of the cancellation.
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    sum += beta_[idx(order_, n, k)] * std::expm1(b_[static_cast<std::size_t>(k - 1)] * t);
  }
  return (n == 1 ? 1.0 : 0.0) + sum;
}

double ExpansionTable::chi(int n, double t) const {
  check_index(n);
  check_time(t);
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double bk = b_[static_cast<std::size_t>(k - 1)];
    sum += beta_[idx(order_, n, k)] / bk * std::expm1(bk * t);
  }
  return 0.5 * params_.kappa_up() * sum;
}

double ExpansionTable::mean_inverse(std::span<const double> initial_moments,
                                    double t) const {
  if (initial_moments.size() < static_cast<std::size_t>(order_)) {
    throw_invalid("need at least K initial inverse moments");
  }
  double sum = 0.0;
  for (int n = 1; n <= order_; ++n) {
    sum += g(n, t) * initial_moments[static_cast<std::size_t>(n - 1)];
  }
  return sum;
}

TriangularSystem build_triangular_system(const AmplifierParams& params, int order) {
  check_order(order);
  TriangularSystem sys;
  sys.order = order;
  const auto k_sz = static_cast<std::size_t>(order);
  sys.s.assign(k_sz * k_sz, 0.0);
  for (int m = 1; m <= order; ++m) {
    sys.s[idx(order, m, m)] = 1.0;
    for (int n = m + 1; n <= order; ++n) {
      double value = 1.0;
      for (int j = m; j <= n - 1; ++j) {
        value *= rate_c(params, j) / (rate_b(params, n) - rate_b(params, j));
      }
      sys.s[idx(order, m, n)] = value;
    }
  }

  // S = I + N with N nilpotent, so S^{-1} = I - N + N^2 - ... (K terms),
  // accumulated in Horner form X <- I - N X.
  std::vector<double> nil = sys.s;
  for (int m = 1; m <= order; ++m) nil[idx(order, m, m)] = 0.0;
  std::vector<double> identity(k_sz * k_sz, 0.0);
  for (int m = 1; m <= order; ++m) identity[idx(order, m, m)] = 1.0;
  std::vector<double> x = identity;
  for (int q = 1; q < order; ++q) {
    std::vector<double> nx = matmul(nil, x, order);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = identity[i] - nx[i];
  }
  sys.s_inv = std::move(x);
  return sys;
}

std::vector<double> triangular_inverse_closed_form(const AmplifierParams& params,
                                                   int order) {
  check_order(order);
  std::vector<double> inv(static_cast<std::size_t>(order * order), 0.0);
  for (int m = 1; m <= order; ++m) {
    inv[idx(order, m, m)] = 1.0;
    for (int n = m + 1; n <= order; ++n) {
      double num = 1.0;
      for (int j = m; j <= n - 1; ++j) num *= rate_c(params, j);
      double den = 1.0;
      for (int j = m + 1; j <= n; ++j) den *= rate_b(params, m) - rate_b(params, j);
      inv[idx(order, m, n)] = num / den;
    }
  }
  return inv;
}

std::vector<double> moment_generator(const AmplifierParams& params, int order) {
  check_order(order);
  std::vector<double> a(static_cast<std::size_t>(order * order), 0.0);
  for (int n = 1; n <= order; ++n) {
    a[idx(order, n, n)] = rate_b(params, n);
    if (n < order) a[idx(order, n, n + 1)] = rate_c(params, n);
  }
  return a;
}

std::vector<double> g_matrix_route(const AmplifierParams& params, int order,
                                   double t) {
  check_time(t);
  const TriangularSystem sys = build_triangular_system(params, order);
  std::vector<double> g(static_cast<std::size_t>(order), 0.0);
  for (int n = 1; n <= order; ++n) {
    // S e^{Dt} S^{-1} = I + S (e^{Dt} - I) S^{-1}.
    double sum = n == 1 ? 1.0 : 0.0;
    for (int k = 1; k <= n; ++k) {
      sum += sys.s_at(1, k) * std::expm1(rate_b(params, k) * t) * sys.s_inv_at(k, n);
    }
    g[static_cast<std::size_t>(n - 1)] = sum;
  }
  return g;
}

std::vector<double> moment_vector(const AmplifierParams& params,
                                  std::span<const double> initial_moments,
                                  int order, double t) {
  check_time(t);
  if (initial_moments.size() < static_cast<std::size_t>(order)) {
    throw_invalid("need at least K initial inverse moments");
  }
  const TriangularSystem sys = build_triangular_system(params, order);
  // y = e^{Dt} S^{-1} x(0), then x(t) = S y.
  std::vector<double> y(static_cast<std::size_t>(order), 0.0);
  for (int m = 1; m <= order; ++m) {
    double sum = 0.0;
    for (int n = m; n <= order; ++n) {
      sum += sys.s_inv_at(m, n) * initial_moments[static_cast<std::size_t>(n - 1)];
    }
    y[static_cast<std::size_t>(m - 1)] = std::exp(rate_b(params, m) * t) * sum;
  }
  std::vector<double> x(static_cast<std::size_t>(order), 0.0);
  for (int r = 1; r <= order; ++r) {
    double sum = 0.0;
    for (int m = r; m <= order; ++m) sum += sys.s_at(r, m) * y[static_cast<std::size_t>(m - 1)];
    x[static_cast<std::size_t>(r - 1)] = sum;
  }
  return x;
}

std::vector<double> iterated_exponential_coefficients(const AmplifierParams& params,
                                                      int n) {
  const double b1 = rate_b(params, 1);
  const double b2 = rate_b(params, 2);
  const double b3 = rate_b(params, 3);
  const double c1 = rate_c(params, 1);
  const double c2 = rate_c(params, 2);
  switch (n) {
    case 1:
      return {1.0};
    case 2: {
      const double coef = c1 / (b2 - b1);
      return {-coef, coef};
    }
    case 3: {
      const double first = c1 * c2 / ((b3 - b2) * (b3 - b1));
      const double second = c1 * c2 / ((b3 - b2) * (b2 - b1));
      // exp(b1 t) collects -first from the first bracket and +second from
      // the second.
      return {-first + second, -second, first};
    }
    default:
      throw_invalid("iterated-integral route is only available for n <= 3");
  }
}

double g_iterated_route(const AmplifierParams& params, int n, double t) {
  check_time(t);
  const double b1 = rate_b(params, 1);
  const double b2 = rate_b(params, 2);
  const double b3 = rate_b(params, 3);
  const double c1 = rate_c(params, 1);
  const double c2 = rate_c(params, 2);
  // e^{x t} - e^{y t} = expm1(x t) - expm1(y t)
  const auto diff = [t](double x, double y) { return std::expm1(x * t) - std::expm1(y * t); };
  switch (n) {
    case 1:
      return std::exp(b1 * t);
    case 2:
      return c1 / (b2 - b1) * diff(b2, b1);
    case 3:
      return c1 * c2 / ((b3 - b2) * (b3 - b1)) * diff(b3, b1) -
             c1 * c2 / ((b3 - b2) * (b2 - b1)) * diff(b2, b1);
    default:
      throw_invalid("iterated-integral route is only available for n <= 3");
  }
}

std::vector<double> initial_inverse_moments(const CoherentInput& input, int order) {
  check_order(order);
  input.validate_for_expansion();
  std::vector<double> m(static_cast<std::size_t>(order));
  const double inv = 1.0 / input.amplitude_sq;
  double power = 1.0;
  for (auto& value : m) {
    power *= inv;
    value = power;
  }
  return m;
}

double chi_ideal(int n, double gain) {
  if (n < 1) throw_invalid("chi_ideal needs n >= 1");
  if (!std::isfinite(gain) || gain < 1.0) throw_invalid("chi_ideal needs gain >= 1");
  const double log_gain = std::log(gain);
  // prod_{j != k} (j - k) = (-1)^{k-1} (k-1)! (n-k)!
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double log_mag = std::lgamma(static_cast<double>(k)) +
                           std::lgamma(static_cast<double>(n - k + 1));
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double one_minus = -std::expm1(-k * log_gain);
    sum += sign * one_minus / (k * std::exp(log_mag));
  }
  const double fact = std::exp(std::lgamma(static_cast<double>(n)));
  return 0.5 * fact * fact * sum;
}

double phase_variance_expansion(const ExpansionTable& table,
                                std::span<const double> initial_moments, double t,
                                double initial_variance) {
  if (!std::isfinite(initial_variance) || initial_variance < 0.0) {
    throw_invalid("initial phase variance must be finite and >= 0");
  }
  if (initial_moments.size() < static_cast<std::size_t>(table.order())) {
    throw_invalid("need at least K initial inverse moments");
  }
  double sum = initial_variance;
  for (int n = 1; n <= table.order(); ++n) {
    sum += table.chi(n, t) * initial_moments[static_cast<std::size_t>(n - 1)];
  }
  return sum;
}

double phase_variance_expansion(const AmplifierParams& params,
                                const CoherentInput& input, int order, double t,
                                double initial_variance) {
  const ExpansionTable table(params, order);
  const std::vector<double> moments = initial_inverse_moments(input, order);
  return phase_variance_expansion(table, moments, t, initial_variance);
}

ExpansionDiagnostic phase_variance_diagnostic(const AmplifierParams& params,
                                              const CoherentInput& input,
                                              int order, double t) {
  const ExpansionTable table(params, order);
  const std::vector<double> moments = initial_inverse_moments(input, order);
  ExpansionDiagnostic d;
  d.order = order;
  d.value = phase_variance_expansion(table, moments, t);
  const double last =
      table.chi(order, t) * moments[static_cast<std::size_t>(order - 1)];
  d.value_previous_order = d.value - last;
  d.last_term_fraction = d.value > 0.0 ? std::fabs(last) / d.value : 0.0;
  d.flagged = order > 1 && d.last_term_fraction > kLastTermFlagFraction;
  return d;
}

}  // namespace phasediff
