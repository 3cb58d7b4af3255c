// Small hand-built problems for the unit tests.

#ifndef SDEBP_TESTS_SUPPORT_HPP
#define SDEBP_TESTS_SUPPORT_HPP

#include "sdebp/problem.hpp"

namespace sdebp::testing {

/// p = m = q = 1 problem with b = beta*x + kappa*u, sigma = s constant,
/// r = (rx * x^2 + ru * u^2) / 2, Phi = phi_c * x + phi_q * x^2 / 2.
struct ScalarCoeffs {
  double beta = 0.0;
  double kappa = 1.0;
  double s = 0.0;
  double rx = 0.0;
  double ru = 0.0;
  double phi_c = 0.0;
  double phi_q = 0.0;
  double x0 = 0.0;
};

inline Vector vec1(double v) { return Vector::Constant(1, v); }
inline Matrix mat1(double v) { return Matrix::Constant(1, 1, v); }

inline ProblemSpec scalar_problem(const ScalarCoeffs& c) {
  ProblemSpec ps;
  ps.dims = {1, 1, 1};
  ps.b = [c](double, const Vector& x, const Vector& u) { return Vector(c.beta * x + c.kappa * u); };
  ps.sigma = [c](double, const Vector&, const Vector&) { return mat1(c.s); };
  ps.r = [c](double, const Vector& x, const Vector& u) {
    return 0.5 * (c.rx * x.squaredNorm() + c.ru * u.squaredNorm());
  };
  ps.phi = [c](const Vector& x, const Vector&) { return c.phi_c * x[0] + 0.5 * c.phi_q * x[0] * x[0]; };
  ps.phi_x = [c](const Vector& x, const Vector&) { return vec1(c.phi_c + c.phi_q * x[0]); };
  ps.phi_xx = [c](const Vector&, const Vector&) { return mat1(c.phi_q); };
  ps.b_x = [c](double, const Vector&, const Vector&) { return mat1(c.beta); };
  ps.b_u = [c](double, const Vector&, const Vector&) { return mat1(c.kappa); };
  ps.sigma_x = [](double, const Vector&, const Vector&) { return JacobianStack{mat1(0.0)}; };
  ps.sigma_u = [](double, const Vector&, const Vector&) { return JacobianStack{mat1(0.0)}; };
  ps.r_x = [c](double, const Vector& x, const Vector&) { return Vector(c.rx * x); };
  ps.r_u = [c](double, const Vector&, const Vector& u) { return Vector(c.ru * u); };
  ps.constraint = Box::unbounded(1);
  ps.data_sampler = [](RandomStream&) { return vec1(0.0); };
  ps.x0_sampler = [c](RandomStream&) { return vec1(c.x0); };
  return ps;
}

}  // namespace sdebp::testing

#endif  // SDEBP_TESTS_SUPPORT_HPP
