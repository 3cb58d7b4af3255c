#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sdebp/benchmarks.hpp"
#include "support.hpp"

namespace sdebp {
namespace {

using testing::vec1;

struct Sample {
  ForwardPath fwd;
  NoisePath noise;
};

Sample draw(const ProblemSpec& ps, const TimeGrid& grid, const ControlPath& u, std::uint64_t seed) {
  RandomStream rng(seed);
  NoisePath noise = sample_noise_path(grid, ps.dims.q, rng);
  ForwardPath fwd = simulate_forward(ps, grid, u, noise, ps.x0_sampler(rng));
  return {std::move(fwd), std::move(noise)};
}

TEST(Scheme, ParsesNames) {
  EXPECT_EQ(parse_scheme("high-order"), Scheme::high_order);
  EXPECT_EQ(parse_scheme("euler"), Scheme::euler);
  EXPECT_EQ(to_string(Scheme::high_order), "high-order");
  EXPECT_THROW(parse_scheme("rk4"), ConfigError);
}

TEST(HighOrder, ImplicitStepClosedForm) {
  // b = x, r = 0, Phi_x = 2: each step multiplies Y by (1 + h/2) / (1 - h/2).
  testing::ScalarCoeffs c;
  c.beta = 1.0;
  c.kappa = 0.0;
  c.phi_c = 2.0;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(0.2, 2);
  const ControlPath u(2, vec1(0.0));
  const Sample s = draw(ps, grid, u, 1);
  const BackwardPath b = solve_backward_highorder(ps, grid, u, s.fwd, s.noise, vec1(0.0));
  EXPECT_NEAR(b.y[1][0], 2.0 * 1.05 / 0.95, 1e-14);
  EXPECT_NEAR(b.y[1][0], 2.2105263157894737, 1e-14);
  EXPECT_NEAR(b.y[0][0], 2.0 * std::pow(1.05 / 0.95, 2), 1e-14);
}

TEST(BothSchemes, ConstantTerminalPropagatesUnchanged) {
  testing::ScalarCoeffs c;
  c.s = 0.3;
  c.phi_c = 1.7;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 6);
  const ControlPath u(6, vec1(0.2));
  const Sample s = draw(ps, grid, u, 2);
  for (Scheme scheme : {Scheme::high_order, Scheme::euler}) {
    const BackwardPath b = solve_backward(scheme, ps, grid, u, s.fwd, s.noise, vec1(0.0));
    for (int n = 0; n <= 6; ++n) EXPECT_NEAR(b.y[n][0], 1.7, 1e-14);
  }
}

TEST(BothSchemes, TelescopingRunningGradient) {
  ProblemSpec ps = testing::scalar_problem({});
  ps.r = [](double, const Vector& x, const Vector&) { return x[0]; };
  ps.r_x = [](double, const Vector&, const Vector&) { return vec1(1.0); };
  const TimeGrid grid(1.0, 10);
  const ControlPath u(10, vec1(0.0));
  const Sample s = draw(ps, grid, u, 3);
  for (Scheme scheme : {Scheme::high_order, Scheme::euler}) {
    const BackwardPath b = solve_backward(scheme, ps, grid, u, s.fwd, s.noise, vec1(0.0));
    EXPECT_NEAR(b.y[0][0], 1.0, 1e-14);
  }
}

TEST(HighOrder, ZUsesModifiedIncrement) {
  const Benchmark lin = linear_test_problem();
  const TimeGrid grid(1.0, 2);
  const ControlPath u(2, vec1(0.3));
  const Sample s = draw(lin.problem, grid, u, 4);
  const BackwardPath b = solve_backward_highorder(lin.problem, grid, u, s.fwd, s.noise, vec1(0.0));
  const double h = 0.5;
  const double x2 = s.fwd[2][0];
  // Y_2 = X_2, f_2 = r_x = X_2
  EXPECT_NEAR(b.z[1](0, 0), (2.0 / h) * (x2 + h * x2) * s.noise.omega_tilde(2)[0], 1e-14);
  const double y1 = (x2 + 0.5 * h * x2 + 0.5 * h * s.fwd[1][0]);
  EXPECT_NEAR(b.y[1][0], y1, 1e-14);
  EXPECT_NEAR(b.z[2](0, 0), 0.2, 1e-15);  // phi_xx * sigma
}

TEST(Euler, ZUsesPlainIncrement) {
  const Benchmark lin = linear_test_problem();
  const TimeGrid grid(1.0, 2);
  const ControlPath u(2, vec1(0.3));
  const Sample s = draw(lin.problem, grid, u, 4);
  const BackwardPath b = solve_backward_euler(lin.problem, grid, u, s.fwd, s.noise, vec1(0.0));
  const double h = 0.5;
  const double x2 = s.fwd[2][0];
  EXPECT_NEAR(b.z[1](0, 0), x2 * s.noise.omega(2)[0] / h, 1e-14);
  EXPECT_NEAR(b.y[1][0], x2 + h * x2, 1e-14);
}

TEST(HighOrder, SingularImplicitFactorRaisesStepSizeError) {
  testing::ScalarCoeffs c;
  c.beta = 4.0;  // 1 - h/2 * 4 = 0 at h = 0.5
  c.phi_c = 1.0;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 2);
  const ControlPath u(2, vec1(0.0));
  const Sample s = draw(ps, grid, u, 5);
  try {
    solve_backward_highorder(ps, grid, u, s.fwd, s.noise, vec1(0.0));
    FAIL() << "expected StepSizeError";
  } catch (const StepSizeError& e) {
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(SolveImplicit, MatrixCase) {
  Matrix b(2, 2);
  b << 1.0, 2.0, 0.0, -1.0;
  Vector rhs(2);
  rhs << 1.0, 1.0;
  const Vector y = solve_implicit(b, 0.2, rhs, 0);
  const Matrix a = Matrix::Identity(2, 2) - 0.1 * b;
  EXPECT_LT((a * y - rhs).norm(), 1e-14);
  Matrix singular(2, 2);
  singular << 10.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(solve_implicit(singular, 0.2, rhs, 3), StepSizeError);
}

TEST(Backward, NonFiniteAdjointIsReported) {
  ProblemSpec ps = testing::scalar_problem({});
  ps.r_x = [](double t, const Vector&, const Vector&) {
    return vec1(t > 0.6 ? std::numeric_limits<double>::infinity() : 0.0);
  };
  const TimeGrid grid(1.0, 4);
  const ControlPath u(4, vec1(0.0));
  const Sample s = draw(ps, grid, u, 6);
  for (Scheme scheme : {Scheme::high_order, Scheme::euler}) {
    try {
      solve_backward(scheme, ps, grid, u, s.fwd, s.noise, vec1(0.0));
      FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
      EXPECT_EQ(e.kind(), DivergenceError::Kind::adjoint);
    }
  }
}

TEST(DriverModes, AgreeWhenDiffusionIgnoresState) {
  ProblemSpec restricted = example1_problem(0.5).problem;
  ProblemSpec general = restricted;
  general.driver_mode = DriverMode::general;
  const TimeGrid grid(1.0, 12);
  ControlPath u(12, Vector::Zero(2));
  for (int n = 0; n <= 12; ++n) u[n] << 0.1 * n, -0.05 * n;
  const Sample s = draw(restricted, grid, u, 7);
  for (Scheme scheme : {Scheme::high_order, Scheme::euler}) {
    const BackwardPath a = solve_backward(scheme, restricted, grid, u, s.fwd, s.noise, Vector::Zero(1));
    const BackwardPath b = solve_backward(scheme, general, grid, u, s.fwd, s.noise, Vector::Zero(1));
    for (int n = 0; n <= 12; ++n) {
      EXPECT_EQ(a.y[n], b.y[n]);
      EXPECT_EQ(a.z[n], b.z[n]);
    }
  }
}

TEST(Example1, ComponentsDecouple) {
  const ProblemSpec full = example1_problem(0.5).problem;
  const TimeGrid grid(1.0, 8);
  ControlPath u(8, Vector::Zero(2));
  for (int n = 0; n <= 8; ++n) u[n] << 0.2 - 0.01 * n, 0.3 + 0.02 * n;
  const Sample s = draw(full, grid, u, 8);
  const BackwardPath both = solve_backward_highorder(full, grid, u, s.fwd, s.noise, Vector::Zero(1));
  for (int c = 0; c < 2; ++c) {
    const ProblemSpec one = example1_component(0.5, c).problem;
    NoisePath noise(8, 1);
    ControlPath uc(8, vec1(0.0));
    for (int n = 1; n <= 8; ++n) noise.set(n, {vec1(s.noise.omega(n)[c]), vec1(s.noise.omega_tilde(n)[c])});
    for (int n = 0; n <= 8; ++n) uc[n][0] = u[n][c];
    const ForwardPath fwd = simulate_forward(one, grid, uc, noise, vec1(0.0));
    const BackwardPath single = solve_backward_highorder(one, grid, uc, fwd, noise, Vector::Zero(1));
    for (int n = 0; n <= 8; ++n) {
      EXPECT_NEAR(fwd[n][0], s.fwd[n][c], 1e-14);
      EXPECT_NEAR(single.y[n][0], both.y[n][c], 1e-12);
      EXPECT_NEAR(single.z[n](0, 0), both.z[n](c, c), 1e-12);
    }
  }
}

TEST(Backward, AdjointStaysBoundedOnBenchmark) {
  const ProblemSpec ps = example1_problem(0.5).problem;
  const TimeGrid grid(1.0, 40);
  const ControlPath u = sample_control(example1_problem(0.5).exact_control, grid);
  RandomStream rng(10);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const NoisePath noise = sample_noise_path(grid, 2, rng);
    const ForwardPath fwd = simulate_forward(ps, grid, u, noise, Vector::Zero(2));
    const BackwardPath b = solve_backward_highorder(ps, grid, u, fwd, noise, Vector::Zero(1));
    for (int n = 0; n <= 40; ++n) worst = std::max(worst, b.y[n].norm());
  }
  EXPECT_LT(worst, 10.0);
}

TEST(Backward, RejectsMismatchedPaths) {
  const ProblemSpec ps = testing::scalar_problem({});
  const TimeGrid grid(1.0, 4);
  const ControlPath u(4, vec1(0.0));
  const Sample s = draw(ps, grid, u, 11);
  const ControlPath shorter(3, vec1(0.0));
  EXPECT_THROW(solve_backward_highorder(ps, grid, shorter, s.fwd, s.noise, vec1(0.0)), ConfigError);
}

}  // namespace
}  // namespace sdebp
