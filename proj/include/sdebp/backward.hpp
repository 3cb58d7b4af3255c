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

#ifndef SDEBP_BACKWARD_HPP
#define SDEBP_BACKWARD_HPP

#include <string>
#include <vector>

#include "sdebp/path_sim.hpp"

namespace sdebp {

enum class Scheme {
  high_order,  // trapezoidal Y, modified-increment Z
  euler,       // explicit Euler baseline
};

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& text);

/// Sample-wise adjoint pair: Y_n in R^p and Z_n in R^{p x q} for n = 0..N.
struct BackwardPath {
  std::vector<Vector> y;
  std::vector<Matrix> z;
};

/// Driver f = b_x^T Y + r_x, plus sum_j (sigma_x^j)^T Z^(j) in general mode.
Vector driver(const ProblemSpec& problem, double t, const Vector& x, const Vector& u,
              const Vector& y, const Matrix& z);

/// Z at the terminal node: phi_xx(X_N, gamma) * sigma(T, X_N, u_N) when the
/// problem supplies phi_xx, otherwise zero.
Matrix terminal_z(const ProblemSpec& problem, double t, const Vector& x, const Vector& u,
                  const Vector& gamma);

/// Solves (I - (h/2) B) y = rhs. Scalar division when p = 1, LU with partial
/// pivoting otherwise. Throws StepSizeError when the matrix is singular or its
/// reciprocal condition estimate is below 1e-12.
Vector solve_implicit(const Matrix& b_x_transposed, double h, const Vector& rhs, int step);

/// Second-order sample-wise backward pass. For n = N-1..0:
///   Z_n = (2/h) (Y_{n+1} + h f_{n+1}) omega_tilde_{n+1}^T
///   (I - h/2 b_x^T(t_n)) Y_n = Y_{n+1} + h/2 f_{n+1} + h/2 r_x(t_n) [+ h/2 sum_j (sigma_x^j)^T Z_n^(j)]
BackwardPath solve_backward_highorder(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, const ForwardPath& fwd,
                                      const NoisePath& noise, const Vector& gamma);

/// Half-order baseline. For n = N-1..0:
///   Z_n = (1/h) Y_{n+1} omega_{n+1}^T,   Y_n = Y_{n+1} + h f_{n+1}.
BackwardPath solve_backward_euler(const ProblemSpec& problem, const TimeGrid& grid,
                                  const ControlPath& u, const ForwardPath& fwd,
                                  const NoisePath& noise, const Vector& gamma);

BackwardPath solve_backward(Scheme scheme, const ProblemSpec& problem, const TimeGrid& grid,
                            const ControlPath& u, const ForwardPath& fwd, const NoisePath& noise,
                            const Vector& gamma);

}  // namespace sdebp

#endif  // SDEBP_BACKWARD_HPP
