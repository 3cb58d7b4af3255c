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

#ifndef SDEBP_PROBLEM_HPP
#define SDEBP_PROBLEM_HPP

#include <functional>
#include <string>
#include <vector>

#include "sdebp/types.hpp"

namespace sdebp {

struct Dims {
  int p = 1;  // state
  int m = 1;  // control
  int q = 1;  // noise

  void validate() const;
};

/// Uniform partition 0 = t_0 < ... < t_N = T.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double h() const { return h_; }
  double node(int n) const;

 private:
  double horizon_;
  int steps_;
  double h_;
};

/// Per-component box [lo_i, hi_i]; infinite bounds allowed.
class Box {
 public:
  Box() = default;
  Box(Vector lo, Vector hi);

  static Box unbounded(int m);
  static Box uniform(int m, double lo, double hi);

  int size() const { return static_cast<int>(lo_.size()); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  bool contains(const Vector& v) const;

 private:
  Vector lo_;
  Vector hi_;
};

/// Componentwise clamp onto the box. Total.
Vector project_box(const Box& box, const Vector& v);

enum class DriverMode {
  restricted,  // f = b_x^T Y + r_x
  general,     // f = b_x^T Y + r_x + sum_j (sigma_x^j)^T Z^(j)
};

std::string to_string(DriverMode mode);
DriverMode parse_driver_mode(const std::string& text);

using VectorFn = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using MatrixFn = std::function<Matrix(double t, const Vector& x, const Vector& u)>;
using StackFn = std::function<JacobianStack(double t, const Vector& x, const Vector& u)>;
using ScalarFn = std::function<double(double t, const Vector& x, const Vector& u)>;
using TerminalFn = std::function<double(const Vector& x, const Vector& gamma)>;
using TerminalGradFn = std::function<Vector(const Vector& x, const Vector& gamma)>;
using TerminalHessFn = std::function<Matrix(const Vector& x, const Vector& gamma)>;
using Sampler = std::function<Vector(RandomStream& rng)>;

/// Controlled SDE dX = b dt + sigma dW with cost E[int r dt + Phi(X_T, gamma)],
/// together with every derivative the adjoint equations need. Derivatives are
/// supplied by the caller and verified with check_derivatives().
///
/// Shapes: b, r_x in R^p; sigma in R^{p x q}; b_x in R^{p x p}; b_u in R^{p x m};
/// sigma_x[j] in R^{p x p} and sigma_u[j] in R^{p x m} for column j of sigma;
/// r_u in R^m; phi_x in R^p; phi_xx in R^{p x p}.
struct ProblemSpec {
  Dims dims;

  VectorFn b;
  MatrixFn sigma;
  ScalarFn r;
  TerminalFn phi;  // optional; needed for cost diagnostics
  TerminalGradFn phi_x;

  MatrixFn b_x;
  MatrixFn b_u;
  StackFn sigma_x;
  StackFn sigma_u;
  VectorFn r_x;
  VectorFn r_u;
  TerminalHessFn phi_xx;  // optional; sets the terminal Z

  DriverMode driver_mode = DriverMode::restricted;
  Box constraint;

  Sampler data_sampler;
  Sampler x0_sampler;

  /// Throws ConfigError when a required callable is missing or the box does
  /// not match the control dimension.
  void validate() const;
};

/// Piecewise-constant control with values at nodes n = 0..N.
struct ControlPath {
  std::vector<Vector> values;

  ControlPath() = default;
  ControlPath(int steps, const Vector& fill);

  int steps() const { return static_cast<int>(values.size()) - 1; }
  const Vector& operator[](int n) const { return values[static_cast<std::size_t>(n)]; }
  Vector& operator[](int n) { return values[static_cast<std::size_t>(n)]; }
};

struct DerivativeCheckOptions {
  int trials = 100;
  double tol = 1e-5;
  double t_max = 1.0;
  double scale = 1.0;  // x and u drawn as scale * N(0, 1)
  std::uint64_t seed = 12345;
};

struct DerivativeFieldReport {
  std::string name;
  double max_rel_error = 0.0;
  int nonfinite = 0;        // sampled points where a coefficient was not finite
  int shape_mismatch = 0;   // sampled points where an output had the wrong shape
  bool passed = true;
};

struct DerivativeReport {
  std::vector<DerivativeFieldReport> fields;

  bool ok() const;
  const DerivativeFieldReport& field(const std::string& name) const;
};

/// Compares every supplied derivative with central finite differences of its
/// base function, step 1e-6 * (1 + |x_i|). The relative error of a field at a
/// point is |analytic - fd|_F / max(|fd|_F, 1e-6).
DerivativeReport check_derivatives(const ProblemSpec& problem,
                                   const DerivativeCheckOptions& options = {});

}  // namespace sdebp

#endif  // SDEBP_PROBLEM_HPP
