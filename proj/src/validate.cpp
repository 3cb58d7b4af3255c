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

#include "sdebp/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdebp/benchmarks.hpp"

namespace sdebp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

InitialAdjointEstimate samplewise_initial_adjoint(const ProblemSpec& problem, const TimeGrid& grid,
                                                  const ControlPath& u, Scheme scheme,
                                                  long long samples, std::uint64_t seed,
                                                  const IncrementLaw& law) {
  if (samples < 2) throw ConfigError("need at least two samples");
  const int p = problem.dims.p;
  const int pq = p * problem.dims.q;
  Eigen::VectorXd sy = Eigen::VectorXd::Zero(p), sy2 = sy;
  Eigen::VectorXd sz = Eigen::VectorXd::Zero(pq), sz2 = sz;
  RandomStream rng(seed);
  for (long long s = 0; s < samples; ++s) {
    const Vector gamma = problem.data_sampler(rng);
    const Vector x0 = problem.x0_sampler(rng);
    const NoisePath noise = sample_noise_path(grid, problem.dims.q, rng, law);
    const ForwardPath fwd = simulate_forward(problem, grid, u, noise, x0);
    const BackwardPath bwd = solve_backward(scheme, problem, grid, u, fwd, noise, gamma);
    const Eigen::VectorXd y = bwd.y[0];
    const Matrix z = bwd.z[0];
    const Eigen::VectorXd zf = Eigen::Map<const Eigen::VectorXd>(z.data(), pq);
    sy += y;
    sy2 += y.cwiseAbs2();
    sz += zf;
    sz2 += zf.cwiseAbs2();
  }
  const double k = static_cast<double>(samples);
  auto finish = [k, samples](const Eigen::VectorXd& s, const Eigen::VectorXd& s2) {
    OracleEstimate e;
    e.value = s / k;
    const Eigen::VectorXd var = ((s2 - k * e.value.cwiseAbs2()) / (k - 1.0)).cwiseMax(0.0);
    e.standard_error = (var / k).cwiseSqrt();
    e.samples_used = samples;
    return e;
  };
  return {finish(sy, sy2), finish(sz, sz2)};
}

double max_combined_z(const OracleEstimate& a, const OracleEstimate& b) {
  if (a.value.size() != b.value.size()) throw ConfigError("estimates have different sizes");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.value.size(); ++i) {
    const double diff = std::abs(a.value[i] - b.value[i]);
    const double se = std::hypot(a.standard_error[i], b.standard_error[i]);
    const double z = se > 0 ? diff / se : (diff == 0 ? 0.0 : HUGE_VAL);
    worst = std::max(worst, z);
  }
  return worst;
}

RandomBoxTrial projection_trials(long long trials, std::uint64_t seed) {
  RandomStream rng(seed);
  RandomBoxTrial worst;
  for (long long k = 0; k < trials; ++k) {
    const int m = 1 + static_cast<int>(rng.uniform() * kMaxDim) % kMaxDim;
    Vector lo(m), hi(m), v(m), w(m);
    for (int i = 0; i < m; ++i) {
      const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
      lo[i] = std::min(a, b);
      hi[i] = std::max(a, b);
      v[i] = 3.0 * rng.normal();
      w[i] = 3.0 * rng.normal();
    }
    const Box box(lo, hi);
    const Vector pv = project_box(box, v);
    const Vector pw = project_box(box, w);
    worst.nonexpansive_excess =
        std::max(worst.nonexpansive_excess, (pv - pw).norm() - (v - w).norm());
    // The inner product is linear in y, so its maximum over the box sits at a corner.
    for (int mask = 0; mask < (1 << m); ++mask) {
      Vector y(m);
      for (int i = 0; i < m; ++i) y[i] = (mask >> i & 1) ? hi[i] : lo[i];
      worst.variational_excess = std::max(worst.variational_excess, (v - pv).dot(y - pv));
    }
  }
  return worst;
}

std::vector<std::pair<int, int>> gradient_check_pairs() { return {{0, 0}, {1, 1}, {3, 0}}; }

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  const bool quick = options.quick;
  const double band = quick ? 6.0 : 4.0;
  const double tight = quick ? 6.0 : 3.0;
  std::vector<CheckResult> out;

  for (const double h : {0.01, 0.1, 1.0}) {
    const long long draws = quick ? 10000 : 1000000;
    const IncrementLawReport r =
        increment_law_check(h, draws, derive_seed(options.seed, 1, static_cast<std::uint64_t>(std::lround(1.0 / h))), options.law, 1000,
                            quick ? 10000 : 100000);
    std::ostringstream d;
    d << "max dev " << fmt(r.closed_form.max_deviation(h)) << " SE, sub-grid "
      << fmt(r.subgrid->max_deviation(h)) << " SE, agreement var " << fmt(r.var_agreement)
      << " cov " << fmt(r.cov_agreement);
    out.push_back({"increment law h=" + fmt(h), r.passed(band), d.str()});
  }

  {
    const Benchmark lin = linear_test_problem();
    const TimeGrid grid(lin.horizon, 2);
    const ControlPath u(2, Vector::Constant(1, 0.3));
    const InitialAdjointEstimate sw = samplewise_initial_adjoint(
        lin.problem, grid, u, Scheme::high_order, quick ? 10000 : 1000000,
        derive_seed(options.seed, 2), options.law);
    NestedMcConfig cfg;
    cfg.outer = quick ? 300 : 2000;
    cfg.inner = quick ? 300 : 2000;
    cfg.seed = derive_seed(options.seed, 3);
    RandomStream rng(0);
    const NestedMcResult nm = nested_mc_bsde(lin.problem, grid, u, cfg,
                                             lin.problem.data_sampler(rng), lin.problem.x0_sampler(rng));
    const double zy = max_combined_z(sw.y0, nm.y0);
    const double zz = max_combined_z(sw.z0, nm.z0);
    out.push_back({"unbiasedness Y0 (N=2)", zy <= tight, fmt(zy) + " combined SE"});
    out.push_back({"unbiasedness Z0 (N=2)", zz <= tight, fmt(zz) + " combined SE"});
  }

  {
    const Benchmark ex1 = example1_problem(0.5);
    const int n_steps = 4;
    const TimeGrid grid(ex1.horizon, n_steps);
    const ControlPath u(n_steps, Vector::Zero(2));
    const long long samples = quick ? 10000 : 100000;
    const GradientStatistics g = gradient_statistics(ex1.problem, grid, u, Scheme::high_order,
                                                     samples, derive_seed(options.seed, 4));
    for (const auto& [node, comp] : gradient_check_pairs()) {
      FdConfig fc;
      fc.samples = samples;
      fc.seed = derive_seed(options.seed, 5, static_cast<std::uint64_t>(node),
                            static_cast<std::uint64_t>(comp));
      const FdEstimate fd = finite_difference_gradient(ex1.problem, grid, u, node, comp, fc);
      const double est = g.mean[static_cast<std::size_t>(node)][comp];
      const double se = std::hypot(g.standard_error[static_cast<std::size_t>(node)][comp],
                                   fd.gradient.standard_error[0]);
      const double diff = std::abs(est - fd.gradient.value[0]);
      const double tol = tight * se + 2.0 / n_steps;
      std::ostringstream d;
      d << "estimator " << fmt(est) << " fd " << fmt(fd.gradient.value[0]) << " |diff| " << fmt(diff)
        << " tol " << fmt(tol) << (fd.inconclusive ? " (fd inconclusive)" : "");
      out.push_back({"gradient vs fd node " + std::to_string(node) + " comp " + std::to_string(comp),
                     !fd.inconclusive && diff <= tol, d.str()});
    }
  }

  {
    const RandomBoxTrial t = projection_trials(quick ? 1000 : 10000, derive_seed(options.seed, 6));
    const bool ok = t.nonexpansive_excess <= 1e-12 && t.variational_excess <= 1e-12;
    out.push_back({"projection properties", ok,
                   "nonexpansive excess " + fmt(t.nonexpansive_excess) + ", variational excess " +
                       fmt(t.variational_excess)});
  }

  for (const auto& [name, bench] :
       {std::pair{std::string("example1"), example1_problem(0.5)},
        std::pair{std::string("example2"), example2_problem(0.1, 1.0)}}) {
    DerivativeCheckOptions dc;
    dc.scale = 0.5;
    const DerivativeReport rep = check_derivatives(bench.problem, dc);
    double worst = 0.0;
    for (const auto& f : rep.fields) worst = std::max(worst, f.max_rel_error);
    out.push_back({"derivatives " + name, rep.ok(), "max relative error " + fmt(worst)});
  }
  return out;
}

}  // namespace sdebp
