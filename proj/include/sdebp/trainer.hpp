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

#ifndef SDEBP_TRAINER_HPP
#define SDEBP_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdebp/backward.hpp"

namespace sdebp {

struct TrainConfig {
  long long iterations = 1000;  // K
  double theta = 2.0;
  double offset = 50.0;  // M
  Scheme scheme = Scheme::high_order;
  std::optional<DriverMode> driver_mode;  // overrides the problem's mode when set
  std::uint64_t seed = 1;
  std::optional<Vector> u0;  // constant initial control; zeros when unset
  long long record_every = 0;  // 0 keeps only the final control
  long long cost_samples = 0;  // Monte Carlo samples per snapshot cost; 0 disables

  void validate() const;
  /// eta_k = theta / (k + M).
  double step_size(long long k) const;
};

struct Snapshot {
  long long iteration = 0;  // k: the control after k updates
  ControlPath control;
  double gradient_norm = 0.0;  // RMS over nodes of the last gradient applied
  std::optional<double> cost;
  std::optional<double> cost_se;
};

struct TrainResult {
  ControlPath control;
  std::vector<Snapshot> snapshots;
  std::vector<std::string> warnings;
};

/// Training stopped because a path or adjoint diverged.
class TrainingAborted : public Error {
 public:
  TrainingAborted(long long iteration, const std::string& cause)
      : Error("training aborted at iteration " + std::to_string(iteration) + ": " + cause),
        iteration_(iteration) {}
  long long iteration() const { return iteration_; }

 private:
  long long iteration_;
};

/// g_n = b_u^T Y_n + sum_j (sigma_u^j)^T Z_n^(j) + r_u at every node n = 0..N.
std::vector<Vector> estimate_gradient(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, const ForwardPath& fwd,
                                      const BackwardPath& bwd);

/// RMS over nodes of |g_n|.
double gradient_norm(const std::vector<Vector>& g);

/// One projected SGD update u_n <- P(u_n - eta g_n) on a caller-supplied sample.
/// Returns the gradient that was applied.
std::vector<Vector> sgd_step(const ProblemSpec& problem, const TimeGrid& grid, Scheme scheme,
                             ControlPath& u, const NoisePath& noise, const Vector& x0,
                             const Vector& gamma, double eta);

/// Projected sample-wise SGD. Each iteration draws gamma, X_0 and a fresh
/// noise path from a stream seeded by cfg.seed, in that order.
TrainResult train(const ProblemSpec& problem, const TimeGrid& grid, const TrainConfig& cfg);

/// h sum_{n<N} r(t_n, X_n, u_n) + Phi(X_N, gamma) along one path.
double path_cost(const ProblemSpec& problem, const TimeGrid& grid, const ControlPath& u,
                 const ForwardPath& fwd, const Vector& gamma);

struct CostEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  long long samples = 0;
  long long excluded = 0;  // diverged paths
};

/// Monte Carlo estimate of the discrete cost. Diverged paths are skipped and
/// counted; more than 1% exclusions is an error.
CostEstimate cost_monte_carlo(const ProblemSpec& problem, const TimeGrid& grid,
                              const ControlPath& u, long long samples, RandomStream& rng);

struct GradientStatistics {
  std::vector<Vector> mean;            // per node
  std::vector<Vector> standard_error;  // per node
  long long samples = 0;
};

/// Average of the sample-wise gradient over fresh independent samples.
GradientStatistics gradient_statistics(const ProblemSpec& problem, const TimeGrid& grid,
                                       const ControlPath& u, Scheme scheme, long long samples,
                                       std::uint64_t seed, const IncrementLaw& law = {});

}  // namespace sdebp

#endif  // SDEBP_TRAINER_HPP
