#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sdebp/path_sim.hpp"
#include "support.hpp"

namespace sdebp {
namespace {

using testing::vec1;

TEST(Increment, ZeroDrawGivesZero) {
  const IncrementPair p = increment_from_normals(0.3, vec1(0.0), vec1(0.0));
  EXPECT_EQ(p.omega[0], 0.0);
  EXPECT_EQ(p.omega_tilde[0], 0.0);
}

TEST(Increment, UnitStepFormula) {
  const IncrementPair p = increment_from_normals(1.0, vec1(1.0), vec1(0.0));
  EXPECT_DOUBLE_EQ(p.omega[0], 1.0);
  EXPECT_DOUBLE_EQ(p.omega_tilde[0], 0.5);
  const IncrementPair q = increment_from_normals(4.0, vec1(0.0), vec1(1.0));
  EXPECT_DOUBLE_EQ(q.omega_tilde[0], std::sqrt(3.0));
}

TEST(Increment, RejectsNonpositiveStep) {
  EXPECT_THROW(increment_from_normals(0.0, vec1(1.0), vec1(0.0)), ConfigError);
  EXPECT_THROW(increment_from_normals(-0.1, vec1(1.0), vec1(0.0)), ConfigError);
}

class IncrementMomentsTest : public ::testing::TestWithParam<double> {};

// Var(dW~) = 4h + 3h - 6h = h and Cov(dW, dW~) = 2h - (3/h)(h^2/2) = h/2 from the
// Ito isometry applied to int (r - t_n) dW_r.
TEST_P(IncrementMomentsTest, MatchesItoIsometry) {
  const double h = GetParam();
  const int draws = 200000;
  RandomStream rng(77);
  double sw = 0, st = 0, sww = 0, stt = 0, swt = 0;
  for (int i = 0; i < draws; ++i) {
    const IncrementPair p = sample_increment_pair(h, 1, rng);
    const double a = p.omega[0], b = p.omega_tilde[0];
    sw += a;
    st += b;
    sww += a * a;
    stt += b * b;
    swt += a * b;
  }
  const double n = draws;
  // Gaussian fourth moments: Var(w^2) = 2h^2, Var(w w~) = h^2 + (h/2)^2.
  EXPECT_NEAR(sw / n, 0.0, 5 * std::sqrt(h / n));
  EXPECT_NEAR(st / n, 0.0, 5 * std::sqrt(h / n));
  EXPECT_NEAR(sww / n, h, 5 * std::sqrt(2.0 / n) * h);
  EXPECT_NEAR(stt / n, h, 5 * std::sqrt(2.0 / n) * h);
  EXPECT_NEAR(swt / n, 0.5 * h, 5 * std::sqrt(1.25 / n) * h);
}

INSTANTIATE_TEST_SUITE_P(Steps, IncrementMomentsTest, ::testing::Values(0.01, 0.1, 1.0));

TEST(Increment, ComponentsAreIndependentAcrossColumns) {
  RandomStream rng(5);
  double s = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const IncrementPair p = sample_increment_pair(1.0, 2, rng);
    s += p.omega_tilde[0] * p.omega_tilde[1];
  }
  EXPECT_NEAR(s / draws, 0.0, 5.0 / std::sqrt(draws));
}

TEST(Forward, FrozenDynamicsStayPut) {
  testing::ScalarCoeffs c;
  c.kappa = 0.0;
  c.s = 0.0;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 5);
  RandomStream rng(1);
  const NoisePath noise = sample_noise_path(grid, 1, rng);
  const ForwardPath f = simulate_forward(ps, grid, ControlPath(5, vec1(0.7)), noise, vec1(0.25));
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(f[n][0], 0.25);
}

TEST(Forward, DeterministicRamp) {
  testing::ScalarCoeffs c;  // b = u, sigma = 0
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 10);
  RandomStream rng(1);
  const NoisePath noise = sample_noise_path(grid, 1, rng);
  const ForwardPath f = simulate_forward(ps, grid, ControlPath(10, vec1(1.0)), noise, vec1(0.0));
  for (int n = 0; n <= 10; ++n) EXPECT_NEAR(f[n][0], 0.1 * n, 1e-15);
}

TEST(Forward, EulerMaruyamaStepUsesOmega) {
  testing::ScalarCoeffs c;
  c.beta = -1.0;
  c.s = 0.5;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 2);
  NoisePath noise(2, 1);
  noise.set(1, {vec1(0.3), vec1(-9.0)});
  noise.set(2, {vec1(-0.2), vec1(9.0)});
  const ForwardPath f = simulate_forward(ps, grid, ControlPath(2, vec1(0.4)), noise, vec1(1.0));
  const double x1 = 1.0 + 0.5 * (-1.0 + 0.4) + 0.5 * 0.3;
  const double x2 = x1 + 0.5 * (-x1 + 0.4) + 0.5 * -0.2;
  EXPECT_DOUBLE_EQ(f[1][0], x1);
  EXPECT_DOUBLE_EQ(f[2][0], x2);
}

TEST(Forward, DivergenceCarriesStep) {
  testing::ScalarCoeffs c;
  c.beta = 1e200;
  const ProblemSpec ps = testing::scalar_problem(c);
  const TimeGrid grid(1.0, 4);
  NoisePath noise(4, 1);
  try {
    simulate_forward(ps, grid, ControlPath(4, vec1(0.0)), noise, vec1(1.0));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.kind(), DivergenceError::Kind::path);
    EXPECT_EQ(e.step(), 2);
  }
}

TEST(Forward, RejectsMismatchedShapes) {
  const ProblemSpec ps = testing::scalar_problem({});
  const TimeGrid grid(1.0, 4);
  NoisePath noise(3, 1);
  EXPECT_THROW(simulate_forward(ps, grid, ControlPath(4, vec1(0.0)), noise, vec1(0.0)), ConfigError);
}

TEST(NoisePath, SameSeedSamePath) {
  const TimeGrid grid(1.0, 8);
  RandomStream a(9), b(9);
  const NoisePath p = sample_noise_path(grid, 2, a), q = sample_noise_path(grid, 2, b);
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(p.omega(n), q.omega(n));
    EXPECT_EQ(p.omega_tilde(n), q.omega_tilde(n));
  }
}

}  // namespace
}  // namespace sdebp
