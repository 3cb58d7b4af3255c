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

#include "sdebp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdebp/parallel.hpp"
#include "sdebp/trainer.hpp"

namespace sdebp {

namespace {

struct NodeValue {
  Vector y;
  Matrix z;
  Vector y_se;
  Matrix z_se;
};

// Per-branch quantities averaged at a node.
struct BranchTerms {
  Vector a;   // Y_{n+1} + c h f_{n+1}
  Matrix c;   // Z contribution
  Vector sa;  // propagated child error of a
  Matrix sc;  // propagated child error of c
};

class NestedEstimator {
 public:
  NestedEstimator(const ProblemSpec& problem, const TimeGrid& grid, const ControlPath& u,
                  const NestedMcConfig& cfg, const Vector& gamma)
      : problem_(problem), grid_(grid), u_(u), cfg_(cfg), gamma_(gamma),
        general_(problem.driver_mode == DriverMode::general) {}

  NodeValue node(int n, const Vector& x, RandomStream& rng) const {
    if (n == grid_.steps()) return terminal(x);
    const long long m = cfg_.inner;
    Accumulator acc(problem_.dims);
    for (long long i = 0; i < m; ++i) acc.add(branch(n, x, rng));
    return combine(n, x, acc, m);
  }

  BranchTerms branch(int n, const Vector& x, RandomStream& rng) const {
    const int q = problem_.dims.q;
    const double h = grid_.h();
    const double t = grid_.node(n);
    Vector xi1(q), xi2(q);
    for (int j = 0; j < q; ++j) {
      xi1[j] = rng.normal();
      xi2[j] = rng.normal();
    }
    const Vector dw = std::sqrt(h) * xi1;
    const Vector dwt = std::sqrt(h) * (0.5 * xi1 + (std::sqrt(3.0) / 2.0) * xi2);

    const Vector next = x + h * problem_.b(t, x, u_[n]) + problem_.sigma(t, x, u_[n]) * dw;
    if (!next.allFinite()) {
      throw DivergenceError(DivergenceError::Kind::path, n + 1, "oracle branch diverged");
    }
    const NodeValue child = node(n + 1, next, rng);

    const double t1 = grid_.node(n + 1);
    const Matrix bx = problem_.b_x(t1, next, u_[n + 1]);
    Vector f = bx.transpose() * child.y + problem_.r_x(t1, next, u_[n + 1]);
    // |df/dY| y_se + |df/dZ| z_se
    Vector f_se = bx.transpose().cwiseAbs() * child.y_se;
    if (general_) {
      const JacobianStack sx = problem_.sigma_x(t1, next, u_[n + 1]);
      for (int j = 0; j < q; ++j) {
        f += sx[j].transpose() * child.z.col(j);
        f_se += sx[j].transpose().cwiseAbs() * child.z_se.col(j);
      }
    }

    BranchTerms out;
    if (cfg_.scheme == Scheme::high_order) {
      out.a = child.y + 0.5 * h * f;
      out.sa = child.y_se + 0.5 * h * f_se;
      out.c = (2.0 / h) * (child.y + h * f) * dwt.transpose();
      out.sc = (2.0 / h) * (child.y_se + h * f_se) * dwt.cwiseAbs().transpose();
    } else {
      out.a = child.y + h * f;
      out.sa = child.y_se + h * f_se;
      out.c = (1.0 / h) * child.y * dw.transpose();
      out.sc = (1.0 / h) * child.y_se * dw.cwiseAbs().transpose();
    }
    return out;
  }

  struct Accumulator {
    explicit Accumulator(const Dims& d)
        : a(Vector::Zero(d.p)), a2(Vector::Zero(d.p)), sa(Vector::Zero(d.p)),
          c(Matrix::Zero(d.p, d.q)), c2(Matrix::Zero(d.p, d.q)), sc(Matrix::Zero(d.p, d.q)) {}

    void add(const BranchTerms& b) {
      a += b.a;
      a2 += b.a.cwiseAbs2();
      sa += b.sa;
      c += b.c;
      c2 += b.c.cwiseAbs2();
      sc += b.sc;
    }

    Vector a, a2, sa;
    Matrix c, c2, sc;
  };

  NodeValue combine(int n, const Vector& x, const Accumulator& acc, long long m) const {
    const double md = static_cast<double>(m);
    const double h = grid_.h();
    const double t = grid_.node(n);
    const int p = problem_.dims.p;
    const int q = problem_.dims.q;

    auto sample_se = [md](double sum, double sum2) {
      if (md < 2) return 0.0;
      const double mean = sum / md;
      const double var = std::max(0.0, (sum2 - md * mean * mean) / (md - 1.0));
      return std::sqrt(var / md);
    };

    const Vector mean_a = acc.a / md;
    Vector se_a(p);
    for (int i = 0; i < p; ++i) se_a[i] = sample_se(acc.a[i], acc.a2[i]);
    se_a += acc.sa / md / std::sqrt(md);

    NodeValue v;
    v.z = acc.c / md;
    v.z_se = Matrix(p, q);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < q; ++j) v.z_se(i, j) = sample_se(acc.c(i, j), acc.c2(i, j));
    }
    v.z_se += acc.sc / md / std::sqrt(md);

    if (cfg_.scheme == Scheme::euler) {
      v.y = mean_a;
      v.y_se = se_a;
      return v;
    }

    Vector rhs = mean_a + 0.5 * h * problem_.r_x(t, x, u_[n]);
    Vector rhs_se = se_a;
    if (general_) {
      const JacobianStack sx = problem_.sigma_x(t, x, u_[n]);
      for (int j = 0; j < q; ++j) {
        rhs += 0.5 * h * sx[j].transpose() * v.z.col(j);
        rhs_se += 0.5 * h * sx[j].transpose().cwiseAbs() * v.z_se.col(j);
      }
    }
    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(p, p) - 0.5 * h * Eigen::MatrixXd(problem_.b_x(t, x, u_[n]).transpose());
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw StepSizeError(n, "oracle implicit matrix is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    v.y = inv * Eigen::VectorXd(rhs);
    v.y_se = inv.cwiseAbs() * Eigen::VectorXd(rhs_se);
    return v;
  }

 private:
  NodeValue terminal(const Vector& x) const {
    const int n = grid_.steps();
    const double t = grid_.node(n);
    NodeValue v;
    v.y = problem_.phi_x(x, gamma_);
    v.z = problem_.phi_xx ? Matrix(problem_.phi_xx(x, gamma_) * problem_.sigma(t, x, u_[n]))
                          : Matrix(Matrix::Zero(problem_.dims.p, problem_.dims.q));
    v.y_se = Vector::Zero(problem_.dims.p);
    v.z_se = Matrix::Zero(problem_.dims.p, problem_.dims.q);
    return v;
  }

  const ProblemSpec& problem_;
  const TimeGrid& grid_;
  const ControlPath& u_;
  const NestedMcConfig& cfg_;
  const Vector& gamma_;
  bool general_;
};

Eigen::VectorXd flatten(const Matrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

NestedMcResult nested_mc_bsde(const ProblemSpec& problem, const TimeGrid& grid,
                              const ControlPath& u, const NestedMcConfig& cfg,
                              const Vector& gamma, const Vector& x0) {
  problem.validate();
  if (grid.steps() > 3) throw ConfigError("nested Monte Carlo oracle refuses N > 3");
  if (cfg.outer < 2 || cfg.inner < 1) throw ConfigError("nested Monte Carlo needs outer >= 2 and inner >= 1");
  if (u.steps() != grid.steps()) throw ConfigError("control and grid disagree on N");
  if (x0.size() != problem.dims.p) throw ConfigError("initial state has the wrong dimension");

  const NestedEstimator est(problem, grid, u, cfg, gamma);
  const auto outer = static_cast<std::size_t>(cfg.outer);
  std::vector<BranchTerms> terms(outer);
  // One stream per outer branch keeps the result independent of the worker count.
  parallel_for(
      outer,
      [&](std::size_t i) {
        RandomStream rng(derive_seed(cfg.seed, i));
        terms[i] = est.branch(0, x0, rng);
      },
      resolve_thread_count());

  NestedEstimator::Accumulator acc(problem.dims);
  for (const auto& t : terms) acc.add(t);
  const NodeValue v = est.combine(0, x0, acc, cfg.outer);

  NestedMcResult out;
  out.y0 = {Eigen::VectorXd(v.y), Eigen::VectorXd(v.y_se), cfg.outer};
  out.z0 = {flatten(v.z), flatten(v.z_se), cfg.outer};
  return out;
}

FdEstimate finite_difference_gradient(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, int node, int component,
                                      const FdConfig& cfg) {
  problem.validate();
  if (!problem.phi) throw ConfigError("finite-difference gradient needs the terminal cost phi");
  if (node < 0 || node > grid.steps() || component < 0 || component >= problem.dims.m) {
    throw ConfigError("finite-difference coordinate out of range");
  }
  if (!(cfg.eps > 0.0) || cfg.samples < 2) throw ConfigError("finite-difference eps or samples invalid");

  ControlPath up = u;
  ControlPath down = u;
  up[node][component] += cfg.eps;
  down[node][component] -= cfg.eps;
  const double scale = 1.0 / (2.0 * cfg.eps * grid.h());

  RandomStream rng(cfg.seed);
  double sum = 0.0, sum2 = 0.0, abs_diff = 0.0, abs_cost = 0.0;
  for (long long s = 0; s < cfg.samples; ++s) {
    const Vector gamma = problem.data_sampler(rng);
    const Vector x0 = problem.x0_sampler(rng);
    const NoisePath noise = sample_noise_path(grid, problem.dims.q, rng);
    const double jp = path_cost(problem, grid, up, simulate_forward(problem, grid, up, noise, x0), gamma);
    const double jm =
        path_cost(problem, grid, down, simulate_forward(problem, grid, down, noise, x0), gamma);
    const double d = (jp - jm) * scale;
    sum += d;
    sum2 += d * d;
    abs_diff += std::abs(jp - jm);
    abs_cost += std::abs(jp) + std::abs(jm);
  }
  const double n = static_cast<double>(cfg.samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));

  FdEstimate out;
  out.gradient.value = Eigen::VectorXd::Constant(1, mean);
  out.gradient.standard_error = Eigen::VectorXd::Constant(1, std::sqrt(var / n));
  out.gradient.samples_used = cfg.samples;
  // Either the signal is buried in the paired noise, or every difference is at
  // rounding level (then the SE collapses too and the first test cannot fire).
  out.inconclusive = std::abs(mean) < 10.0 * out.gradient.standard_error[0] ||
                     abs_diff <= 10.0 * std::numeric_limits<double>::epsilon() * abs_cost;
  return out;
}

IncrementMoments increment_moments(const std::vector<double>& omega,
                                   const std::vector<double>& tilde) {
  if (omega.size() != tilde.size() || omega.size() < 3) {
    throw ConfigError("increment moments need two equal samples of size >= 3");
  }
  const double n = static_cast<double>(omega.size());
  double mo = 0, mt = 0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    mo += omega[i];
    mt += tilde[i];
  }
  mo /= n;
  mt /= n;

  double so2 = 0, st2 = 0, so4 = 0, st4 = 0, sc = 0, sc2 = 0, lo = 0, lt = 0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double a = omega[i] - mo;
    const double b = tilde[i] - mt;
    so2 += a * a;
    st2 += b * b;
    so4 += a * a * a * a;
    st4 += b * b * b * b;
    sc += a * b;
    sc2 += a * b * a * b;
    if (i > 0) {
      lo += a * (omega[i - 1] - mo);
      lt += b * (tilde[i - 1] - mt);
    }
  }

  IncrementMoments m;
  m.draws = static_cast<long long>(omega.size());
  m.mean_omega = mo;
  m.mean_tilde = mt;
  m.var_omega = so2 / n;
  m.var_tilde = st2 / n;
  m.cov = sc / n;
  m.mean_omega_se = std::sqrt(m.var_omega / n);
  m.mean_tilde_se = std::sqrt(m.var_tilde / n);
  m.var_omega_se = std::sqrt(std::max(0.0, so4 / n - m.var_omega * m.var_omega) / n);
  m.var_tilde_se = std::sqrt(std::max(0.0, st4 / n - m.var_tilde * m.var_tilde) / n);
  m.cov_se = std::sqrt(std::max(0.0, sc2 / n - m.cov * m.cov) / n);
  m.lag_corr_omega = lo / so2;
  m.lag_corr_tilde = lt / st2;
  return m;
}

double IncrementMoments::max_deviation(double h) const {
  const double lag_se = 1.0 / std::sqrt(static_cast<double>(draws));
  const double devs[] = {
      std::abs(mean_omega) / mean_omega_se,
      std::abs(mean_tilde) / mean_tilde_se,
      std::abs(var_omega - h) / var_omega_se,
      std::abs(var_tilde - h) / var_tilde_se,
      std::abs(cov - 0.5 * h) / cov_se,
      std::abs(lag_corr_omega) / lag_se,
      std::abs(lag_corr_tilde) / lag_se,
  };
  double worst = 0.0;
  for (double d : devs) worst = std::isfinite(d) ? std::max(worst, d) : std::numeric_limits<double>::infinity();
  return worst;
}

bool IncrementLawReport::passed(double band) const {
  if (!(closed_form.max_deviation(h) <= band)) return false;
  if (subgrid_valid) {
    if (!(subgrid->max_deviation(h) <= band)) return false;
    if (!(var_agreement <= band) || !(cov_agreement <= band)) return false;
  }
  return true;
}

IncrementLawReport increment_law_check(double h, long long draws, std::uint64_t seed,
                                       const IncrementLaw& law, int subgrid_points,
                                       long long subgrid_draws) {
  if (!(h > 0.0)) throw ConfigError("increment step h must be positive");
  if (draws < 3) throw ConfigError("increment check needs at least 3 draws");
  if (subgrid_draws < 0) subgrid_draws = draws;

  IncrementLawReport report;
  report.h = h;

  {
    RandomStream rng(derive_seed(seed, 1));
    std::vector<double> w(static_cast<std::size_t>(draws)), wt(static_cast<std::size_t>(draws));
    for (long long i = 0; i < draws; ++i) {
      const IncrementPair pair = sample_increment_pair(h, 1, rng, law);
      w[static_cast<std::size_t>(i)] = pair.omega[0];
      wt[static_cast<std::size_t>(i)] = pair.omega_tilde[0];
    }
    report.closed_form = increment_moments(w, wt);
  }

  report.subgrid_valid = subgrid_points >= 2 && subgrid_draws >= 3;
  if (!report.subgrid_valid) return report;

  RandomStream rng(derive_seed(seed, 2));
  const double delta = h / subgrid_points;
  const double sd = std::sqrt(delta);
  std::vector<double> w(static_cast<std::size_t>(subgrid_draws)), wt(w.size());
  for (long long i = 0; i < subgrid_draws; ++i) {
    double dw_sum = 0.0, weighted = 0.0;
    for (int k = 0; k < subgrid_points; ++k) {
      const double dw = sd * rng.normal();
      dw_sum += dw;
      weighted += (k + 0.5) * delta * dw;
    }
    w[static_cast<std::size_t>(i)] = dw_sum;
    wt[static_cast<std::size_t>(i)] = 2.0 * dw_sum - (3.0 / h) * weighted;
  }
  report.subgrid = increment_moments(w, wt);

  const auto& a = report.closed_form;
  const auto& b = *report.subgrid;
  report.var_agreement = std::abs(a.var_tilde - b.var_tilde) / std::hypot(a.var_tilde_se, b.var_tilde_se);
  report.cov_agreement = std::abs(a.cov - b.cov) / std::hypot(a.cov_se, b.cov_se);
  return report;
}

}  // namespace sdebp
