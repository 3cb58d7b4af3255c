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

#ifndef SDEBP_BENCHMARKS_HPP
#define SDEBP_BENCHMARKS_HPP

#include <functional>
#include <string>
#include <vector>

#include "sdebp/trainer.hpp"

namespace sdebp {

using TimeFn = std::function<Vector(double t)>;

struct Benchmark {
  ProblemSpec problem;
  double horizon = 1.0;
  TimeFn exact_control;  // u*(t)
  TimeFn target;         // X*(t), enters the running cost
  std::string label;
};

/// Closed-form constants of the linear-quadratic problem with control-scaled
/// noise, dX = (u - a_t) dt + sigma u dW on [0, 1].
struct Example1Constants {
  double sigma;
  double d;             // D
  Vector terminal_mean; // X_T = (D/2, D sin 1)

  explicit Example1Constants(double sigma);
  double beta(double t) const;
  double alpha(double t) const;
  Vector drift_shift(double t) const;  // a_t
  Vector target(double t) const;       // X*_t
  Vector control(double t) const;      // u*_t
};

/// Two decoupled scalar problems stacked (p = m = q = 2). X_0 = 0, T = 1,
/// Phi = |x|^2 / 2, restricted driver.
Benchmark example1_problem(double sigma = 0.5);

/// One component (0 or 1) of example1_problem as a p = m = q = 1 problem.
Benchmark example1_component(double sigma, int component);

/// Black-Scholes type problem dX = u X dt + sigma X dW, two decoupled
/// components sharing x0, T = 1, Phi = 0. Default driver mode is general.
/// Throws ConfigError when the closed-form control has a nonpositive
/// denominator on [0, T].
Benchmark example2_problem(double sigma = 0.1, double x0 = 1.0);

/// Scalar problem used by the unbiasedness checks: b = u, sigma constant,
/// r = (x^2 + u^2) / 2, Phi = x^2 / 2, T = 1. No closed-form control.
Benchmark linear_test_problem(double sigma = 0.2, double x0 = 0.5);

Benchmark benchmark_by_name(const std::string& name, double sigma, double x0);

/// Control values of `exact` at the grid nodes.
ControlPath sample_control(const TimeFn& exact, const TimeGrid& grid);

/// sqrt( 1/(N+1) sum_n |u_n - u*(t_n)|^2 / m ).
double rmse(const ControlPath& u, const TimeFn& exact, const TimeGrid& grid);

struct SlopeFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of ln(value) against ln(n).
SlopeFit fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& value);

struct StudyConfig {
  std::vector<int> n_list{10, 14, 20, 28, 40};
  double c_iter = 0.2;
  int runs = 30;
  TrainConfig train;  // iterations and seed are set per cell
  std::uint64_t master_seed = 2024;
  int threads = 0;
};

struct ConvergenceRow {
  int n = 0;
  long long k = 0;
  int runs = 0;
  int aborted = 0;
  double rmse_mean = 0.0;  // sqrt(mean e^2) over completed runs
  double rmse_std = 0.0;   // sample standard deviation of e
  std::vector<double> errors;  // per run; NaN for aborted runs
  std::vector<std::uint64_t> seeds;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

class StudyFailed : public Error {
 public:
  using Error::Error;
};

/// Seed of training run `run` at depth `n`: derive_seed(master, n, run).
std::uint64_t cell_seed(std::uint64_t master, int n, int run);

/// K = round(c_iter N^3).
long long iterations_for(int n, double c_iter);

/// Trains `runs` times for every N and fits the RMSE slope. Cells run in
/// parallel; each owns its derived seed, so the report is schedule-independent.
/// More than 10% aborted runs in one row throws StudyFailed.
ConvergenceReport convergence_study(const Benchmark& benchmark, const StudyConfig& cfg);

/// Assembles rows and the slope from per-run errors (NaN marks an abort).
ConvergenceReport summarize_study(const std::vector<int>& n_list, const std::vector<long long>& k_list,
                                  const std::vector<std::vector<double>>& errors);

}  // namespace sdebp

#endif  // SDEBP_BENCHMARKS_HPP
