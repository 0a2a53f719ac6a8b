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
#include <span>
#include <vector>

#include "phasediff/amplifier.hpp"

// Inverse-number expansion of E[1/N(t)].
//
// The inverse moments x_n = E[Upsilon^n], Upsilon = 1/N, obey
//   dx_n/dt = b_n x_n + c_n x_{n+1},  b_n = -n kappa_minus,  c_n = n^2 kappa_up.
// Truncating at order K gives E[Upsilon(t)] = sum_n g_n(t) x_n(0) with
// g_n(t) = sum_{k<=n} beta_{k,n} exp(b_k t). The coefficients are available
// three ways: the closed-form beta (ExpansionTable), the eigenvector matrix
// S of the bidiagonal generator (TriangularSystem), and iterated integrals
// of the recursion for n <= 3.

namespace phasediff {

inline constexpr int kDefaultExpansionOrder = 4;

/// Immutable table of b_n, c_n and beta_{k,n} for n, k = 1..K.
///
/// beta is a direct product below order 10 and a log-magnitude with tracked
/// sign above, so K in the twenties does not overflow the factorial-squared
/// numerators.
class ExpansionTable {
 public:
  /// Throws Error(InvalidArgument) for K < 1.
  ExpansionTable(const AmplifierParams& params, int order);

  int order() const noexcept { return order_; }
  const AmplifierParams& params() const noexcept { return params_; }

  /// 1-based accessors, matching the usual index convention.
  double b(int n) const;
  double c(int n) const;
  double beta(int k, int n) const;

  /// g_n(t); requires 1 <= n <= order() and t >= 0.
  double g(int n, double t) const;

  /// chi_n(t) = (kappa_up/2) int_0^t g_n.
  double chi(int n, double t) const;

  /// sum_{n=1..K} g_n(t) m_n. moments must hold at least K entries.
  double mean_inverse(std::span<const double> initial_moments, double t) const;

 private:
  void check_index(int n) const;

  AmplifierParams params_;
  int order_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<double> beta_;  // row-major, beta_[(n-1)*K + (k-1)]
};

/// Dense K x K upper-triangular matrices, row-major.
struct TriangularSystem {
  int order = 0;
  std::vector<double> s;      ///< eigenvectors of the generator, by column
  std::vector<double> s_inv;  ///< (I + N)^{-1} from the nilpotent series

  double s_at(int m, int n) const { return s[static_cast<std::size_t>((m - 1) * order + (n - 1))]; }
  double s_inv_at(int m, int n) const {
    return s_inv[static_cast<std::size_t>((m - 1) * order + (n - 1))];
  }
};

/// Builds S from its closed form and inverts it as sum_{q<K} (-N)^q where
/// N = S - I is strictly upper triangular.
TriangularSystem build_triangular_system(const AmplifierParams& params, int order);

/// Closed-form (S^{-1})_{m,n}, for cross-checking the nilpotent series.
std::vector<double> triangular_inverse_closed_form(const AmplifierParams& params,
                                                   int order);

/// The K x K bidiagonal generator A with diagonal b and superdiagonal c.
std::vector<double> moment_generator(const AmplifierParams& params, int order);

/// g_1..g_K at time t from the first row of S exp(D t) S^{-1}.
std::vector<double> g_matrix_route(const AmplifierParams& params, int order,
                                   double t);

/// All K truncated inverse moments x(t) = S exp(D t) S^{-1} x(0).
std::vector<double> moment_vector(const AmplifierParams& params,
                                  std::span<const double> initial_moments,
                                  int order, double t);

/// g_n from the iterated integrals of the moment recursion. n in {1,2,3}.
double g_iterated_route(const AmplifierParams& params, int n, double t);

/// Coefficients of exp(b_k t), k = 1..n, collected from the iterated form.
/// For n = 3 the exp(b_1 t) coefficient is the sum of two terms, which must
/// reproduce beta_{1,3}.
std::vector<double> iterated_exponential_coefficients(const AmplifierParams& params,
                                                      int n);

/// m_n = amplitude_sq^{-n}, n = 1..K. Requires amplitude_sq > 1.
std::vector<double> initial_inverse_moments(const CoherentInput& input, int order);

/// chi_n for the ideal amplifier as a function of the gain alone:
///   [(n-1)!]^2 / 2 sum_k (1 - G^{-k}) / (k prod_{j != k} (j - k)).
double chi_ideal(int n, double gain);

/// V[Phi(t)] = V[Phi(0)] + sum_{n=1..K} chi_n(t) m_n for a coherent input.
double phase_variance_expansion(const AmplifierParams& params,
                                const CoherentInput& input, int order, double t,
                                double initial_variance = 0.0);

double phase_variance_expansion(const ExpansionTable& table,
                                std::span<const double> initial_moments, double t,
                                double initial_variance = 0.0);

/// Heuristic truncation check: compares the order-K and order-(K-1) values.
/// flagged is set when the K-th term exceeds 20 % of the total (a documented
/// heuristic, not a convergence proof).
struct ExpansionDiagnostic {
  int order = 0;
  double value = 0.0;
  double value_previous_order = 0.0;
  double last_term_fraction = 0.0;
  bool flagged = false;
};

inline constexpr double kLastTermFlagFraction = 0.2;

ExpansionDiagnostic phase_variance_diagnostic(const AmplifierParams& params,
                                              const CoherentInput& input,
                                              int order, double t);

}  // namespace phasediff
