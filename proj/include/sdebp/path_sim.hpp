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

#ifndef SDEBP_PATH_SIM_HPP
#define SDEBP_PATH_SIM_HPP

#include <cmath>
#include <vector>

#include "sdebp/problem.hpp"

namespace sdebp {

/// Coefficients of the modified increment in units of sqrt(h):
///   omega       = sqrt(h) * xi1
///   omega_tilde = sqrt(h) * (shared * xi1 + independent * xi2)
/// The default law gives Var(omega_tilde) = h and Cov(omega, omega_tilde) = h/2,
/// the joint law of (dW, 2 dW - (3/h) int (r - t_n) dW_r).
struct IncrementLaw {
  double shared = 0.5;
  double independent = std::sqrt(3.0) / 2.0;

  /// Swaps the two coefficients. Keeps Var(omega_tilde) = h but breaks the
  /// covariance; used to check that validation catches a broken sampler.
  static IncrementLaw tampered() { return {std::sqrt(3.0) / 2.0, 0.5}; }
};

struct IncrementPair {
  Vector omega;
  Vector omega_tilde;
};

/// Maps standard normals (xi1, xi2) to an increment pair. Throws ConfigError for h <= 0.
IncrementPair increment_from_normals(double h, const Vector& xi1, const Vector& xi2,
                                     const IncrementLaw& law = {});

IncrementPair sample_increment_pair(double h, int q, RandomStream& rng,
                                    const IncrementLaw& law = {});

/// Increment pairs for steps n = 1..N.
class NoisePath {
 public:
  NoisePath(int steps, int q);

  int steps() const { return static_cast<int>(omega_.size()); }
  int q() const { return q_; }

  const Vector& omega(int n) const { return omega_[index(n)]; }
  const Vector& omega_tilde(int n) const { return omega_tilde_[index(n)]; }
  void set(int n, IncrementPair pair);

 private:
  std::size_t index(int n) const { return static_cast<std::size_t>(n - 1); }

  int q_;
  std::vector<Vector> omega_;
  std::vector<Vector> omega_tilde_;
};

NoisePath sample_noise_path(const TimeGrid& grid, int q, RandomStream& rng,
                            const IncrementLaw& law = {});

struct ForwardPath {
  std::vector<Vector> x;  // X_0..X_N

  const Vector& operator[](int n) const { return x[static_cast<std::size_t>(n)]; }
};

/// Euler-Maruyama: X_{n+1} = X_n + h b(t_n, X_n, u_n) + sigma(t_n, X_n, u_n) omega_{n+1}.
/// Throws DivergenceError(path) carrying the first step with a non-finite state.
ForwardPath simulate_forward(const ProblemSpec& problem, const TimeGrid& grid,
                             const ControlPath& u, const NoisePath& noise, const Vector& x0);

}  // namespace sdebp

#endif  // SDEBP_PATH_SIM_HPP
