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

#include "sdebp/backward.hpp"

#include <cmath>

namespace sdebp {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::euler ? "euler" : "high-order";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "high-order" || text == "high_order") return Scheme::high_order;
  if (text == "euler") return Scheme::euler;
  throw ConfigError("unknown scheme '" + text + "'");
}

Vector driver(const ProblemSpec& problem, double t, const Vector& x, const Vector& u,
              const Vector& y, const Matrix& z) {
  Vector f = problem.b_x(t, x, u).transpose() * y + problem.r_x(t, x, u);
  if (problem.driver_mode == DriverMode::general) {
    const JacobianStack sx = problem.sigma_x(t, x, u);
    for (int j = 0; j < problem.dims.q; ++j) f.noalias() += sx[j].transpose() * z.col(j);
  }
  return f;
}

Matrix terminal_z(const ProblemSpec& problem, double t, const Vector& x, const Vector& u,
                  const Vector& gamma) {
  if (!problem.phi_xx) return Matrix::Zero(problem.dims.p, problem.dims.q);
  return problem.phi_xx(x, gamma) * problem.sigma(t, x, u);
}

Vector solve_implicit(const Matrix& b_x_transposed, double h, const Vector& rhs, int step) {
  const auto p = rhs.size();
  if (p == 1) {
    const double a = 1.0 - 0.5 * h * b_x_transposed(0, 0);
    if (!(std::abs(a) > 1e-12)) {
      throw StepSizeError(step, "implicit factor vanishes at step " + std::to_string(step));
    }
    return rhs / a;
  }
  const Matrix a = Matrix::Identity(p, p) - 0.5 * h * b_x_transposed;
  const Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw StepSizeError(step, "implicit matrix is near-singular at step " + std::to_string(step));
  }
  return lu.solve(rhs);
}

namespace {

void check_inputs(const ProblemSpec& problem, const TimeGrid& grid, const ControlPath& u,
                  const ForwardPath& fwd, const NoisePath& noise) {
  const int steps = grid.steps();
  if (u.steps() != steps || noise.steps() != steps ||
      static_cast<int>(fwd.x.size()) != steps + 1) {
    throw ConfigError("control, forward path, noise and grid disagree on N");
  }
  if (noise.q() != problem.dims.q) throw ConfigError("noise has the wrong dimension");
}

void check_finite(const Vector& y, const Matrix& z, int n) {
  if (!y.allFinite() || !z.allFinite()) {
    throw DivergenceError(DivergenceError::Kind::adjoint, n,
                          "adjoint diverged at step " + std::to_string(n));
  }
}

BackwardPath terminal_state(const ProblemSpec& problem, const TimeGrid& grid,
                            const ControlPath& u, const ForwardPath& fwd, const Vector& gamma) {
  const int steps = grid.steps();
  BackwardPath out;
  out.y.resize(static_cast<std::size_t>(steps) + 1);
  out.z.resize(static_cast<std::size_t>(steps) + 1);
  out.y.back() = problem.phi_x(fwd[steps], gamma);
  out.z.back() = terminal_z(problem, grid.node(steps), fwd[steps], u[steps], gamma);
  check_finite(out.y.back(), out.z.back(), steps);
  return out;
}

}  // namespace

BackwardPath solve_backward_highorder(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, const ForwardPath& fwd,
                                      const NoisePath& noise, const Vector& gamma) {
  check_inputs(problem, grid, u, fwd, noise);
  const int steps = grid.steps();
  const double h = grid.h();
  const bool general = problem.driver_mode == DriverMode::general;

  BackwardPath out = terminal_state(problem, grid, u, fwd, gamma);
  for (int n = steps - 1; n >= 0; --n) {
    const auto i = static_cast<std::size_t>(n);
    const double t0 = grid.node(n), t1 = grid.node(n + 1);
    const Vector& y1 = out.y[i + 1];

    const Vector f1 = driver(problem, t1, fwd[n + 1], u[n + 1], y1, out.z[i + 1]);
    out.z[i] = (2.0 / h) * (y1 + h * f1) * noise.omega_tilde(n + 1).transpose();

    Vector rhs = y1 + 0.5 * h * f1 + 0.5 * h * problem.r_x(t0, fwd[n], u[n]);
    if (general) {
      const JacobianStack sx = problem.sigma_x(t0, fwd[n], u[n]);
      for (int j = 0; j < problem.dims.q; ++j) {
        rhs.noalias() += 0.5 * h * sx[j].transpose() * out.z[i].col(j);
      }
    }
    out.y[i] = solve_implicit(problem.b_x(t0, fwd[n], u[n]).transpose(), h, rhs, n);
    check_finite(out.y[i], out.z[i], n);
  }
  return out;
}

BackwardPath solve_backward_euler(const ProblemSpec& problem, const TimeGrid& grid,
                                  const ControlPath& u, const ForwardPath& fwd,
                                  const NoisePath& noise, const Vector& gamma) {
  check_inputs(problem, grid, u, fwd, noise);
  const int steps = grid.steps();
  const double h = grid.h();

  BackwardPath out = terminal_state(problem, grid, u, fwd, gamma);
  for (int n = steps - 1; n >= 0; --n) {
    const auto i = static_cast<std::size_t>(n);
    const Vector& y1 = out.y[i + 1];
    out.z[i] = (1.0 / h) * y1 * noise.omega(n + 1).transpose();
    out.y[i] = y1 + h * driver(problem, grid.node(n + 1), fwd[n + 1], u[n + 1], y1, out.z[i + 1]);
    check_finite(out.y[i], out.z[i], n);
  }
  return out;
}

BackwardPath solve_backward(Scheme scheme, const ProblemSpec& problem, const TimeGrid& grid,
                            const ControlPath& u, const ForwardPath& fwd, const NoisePath& noise,
                            const Vector& gamma) {
  return scheme == Scheme::euler ? solve_backward_euler(problem, grid, u, fwd, noise, gamma)
                                 : solve_backward_highorder(problem, grid, u, fwd, noise, gamma);
}

}  // namespace sdebp
