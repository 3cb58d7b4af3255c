/*
 Copyright 2026 The sdebp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SDEBP_ORACLE_HPP
#define SDEBP_ORACLE_HPP

// Brute-force reference computations. Nothing here calls the sample-wise
// backward solvers, so the estimates stay independent of the code they check.

#include <cstdint>
#include <optional>

#include "sdebp/backward.hpp"
#include "sdebp/path_sim.hpp"

namespace sdebp {

struct OracleEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd standard_error;
  long long samples_used = 0;
};

struct NestedMcConfig {
  long long outer = 1000;  // branches from the initial state
  long long inner = 1000;  // branches from every deeper node
  Scheme scheme = Scheme::high_order;
  std::uint64_t seed = 7;
};

struct NestedMcResult {
  OracleEstimate y0;  // p entries
  OracleEstimate z0;  // p*q entries, column-major
};

/// Conditional-expectation BSDE scheme evaluated by literal nested Monte
/// Carlo: every node spawns one-step forward branches and replaces each
/// conditional expectation by a branch average. High-order:
///   (I - h/2 b_x^T) Y_n = E[Y_{n+1}] + h/2 E[f_{n+1}] + h/2 r_x(t_n) [+ general term]
///   Z_n = (2/h) (E[Y_{n+1} dW~^T] + h E[f_{n+1} dW~^T])
/// Euler: Y_n = E[Y_{n+1} + h f_{n+1}],  Z_n = (1/h) E[Y_{n+1} dW^T].
/// Standard errors add the branch-sample error of each level to the
/// propagated error of the level below. Refuses N > 3.
NestedMcResult nested_mc_bsde(const ProblemSpec& problem, const TimeGrid& grid,
                              const ControlPath& u, const NestedMcConfig& cfg,
                              const Vector& gamma, const Vector& x0);

struct FdConfig {
  double eps = 1e-3;
  long long samples = 100000;
  std::uint64_t seed = 11;
};

struct FdEstimate {
  OracleEstimate gradient;  // one entry
  bool inconclusive = false;
};

/// Central difference of the Monte Carlo cost in u_{node, component} with
/// common random numbers, divided by h so it is comparable with g_{n,i}:
///   (J(u + eps e) - J(u - eps e)) / (2 eps h).
/// Flags `inconclusive` when the mean difference is below 10 paired standard
/// errors, or when |J+ - J-| is within 10 rounding units of the cost itself.
FdEstimate finite_difference_gradient(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, int node, int component,
                                      const FdConfig& cfg);

/// Sample moments of (omega, omega_tilde) with standard errors.
struct IncrementMoments {
  long long draws = 0;
  double mean_omega = 0, mean_omega_se = 0;
  double mean_tilde = 0, mean_tilde_se = 0;
  double var_omega = 0, var_omega_se = 0;
  double var_tilde = 0, var_tilde_se = 0;
  double cov = 0, cov_se = 0;
  double lag_corr_omega = 0, lag_corr_tilde = 0;  // consecutive-draw correlation, SE ~ 1/sqrt(n)

  /// Largest deviation from (0, 0, h, h, h/2, 0, 0) in standard-error units.
  double max_deviation(double h) const;
};

struct IncrementLawReport {
  double h = 0;
  IncrementMoments closed_form;
  std::optional<IncrementMoments> subgrid;  // empty when the sub-grid is invalid
  bool subgrid_valid = false;
  double var_agreement = 0;  // |difference| / combined SE
  double cov_agreement = 0;

  bool passed(double band) const;
};

/// Checks the closed-form sampler against (h, h/2) and against a literal
/// construction dW~ = 2 dW - (3/h) int (r - t_n) dW_r on a fine sub-grid
/// (midpoint rule). A sub-grid with fewer than two points is flagged invalid
/// and skipped.
IncrementLawReport increment_law_check(double h, long long draws, std::uint64_t seed,
                                       const IncrementLaw& law = {}, int subgrid_points = 1000,
                                       long long subgrid_draws = -1);

IncrementMoments increment_moments(const std::vector<double>& omega,
                                   const std::vector<double>& tilde);

}  // namespace sdebp

#endif  // SDEBP_ORACLE_HPP
