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

#include "sdebp/trainer.hpp"

#include <cmath>

namespace sdebp {

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  // M = 0 would make eta_0 infinite.
  if (!(offset > 0.0)) throw ConfigError("step-size offset M must be positive");
  if (record_every < 0 || cost_samples < 0) throw ConfigError("negative snapshot settings");
  if (cost_samples == 1) throw ConfigError("cost diagnostics need at least two samples");
}

double TrainConfig::step_size(long long k) const {
  return theta / (static_cast<double>(k) + offset);
}

std::vector<Vector> estimate_gradient(const ProblemSpec& problem, const TimeGrid& grid,
                                      const ControlPath& u, const ForwardPath& fwd,
                                      const BackwardPath& bwd) {
  const int steps = grid.steps();
  if (u.steps() != steps || static_cast<int>(fwd.x.size()) != steps + 1 ||
      static_cast<int>(bwd.y.size()) != steps + 1 || bwd.z.size() != bwd.y.size()) {
    throw ConfigError("gradient inputs disagree on N");
  }
  std::vector<Vector> g(static_cast<std::size_t>(steps) + 1);
  for (int n = 0; n <= steps; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double t = grid.node(n);
    const Matrix bu = problem.b_u(t, fwd[n], u[n]);
    const JacobianStack su = problem.sigma_u(t, fwd[n], u[n]);
    if (bu.rows() != problem.dims.p || bu.cols() != problem.dims.m ||
        static_cast<int>(su.size()) != problem.dims.q || bwd.y[i].size() != problem.dims.p ||
        bwd.z[i].rows() != problem.dims.p || bwd.z[i].cols() != problem.dims.q) {
      throw ConfigError("gradient inputs have inconsistent shapes at node " + std::to_string(n));
    }
    Vector gn = bu.transpose() * bwd.y[i] + problem.r_u(t, fwd[n], u[n]);
    for (int j = 0; j < problem.dims.q; ++j) gn.noalias() += su[j].transpose() * bwd.z[i].col(j);
    g[i] = std::move(gn);
  }
  return g;
}

double gradient_norm(const std::vector<Vector>& g) {
  double sum = 0.0;
  for (const auto& gn : g) sum += gn.squaredNorm();
  return g.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(g.size()));
}

std::vector<Vector> sgd_step(const ProblemSpec& problem, const TimeGrid& grid, Scheme scheme,
                             ControlPath& u, const NoisePath& noise, const Vector& x0,
                             const Vector& gamma, double eta) {
  const ForwardPath fwd = simulate_forward(problem, grid, u, noise, x0);
  const BackwardPath bwd = solve_backward(scheme, problem, grid, u, fwd, noise, gamma);
  std::vector<Vector> g = estimate_gradient(problem, grid, u, fwd, bwd);
  for (int n = 0; n <= grid.steps(); ++n) {
    u[n] = project_box(problem.constraint, u[n] - eta * g[static_cast<std::size_t>(n)]);
  }
  return g;
}

TrainResult train(const ProblemSpec& base_problem, const TimeGrid& grid, const TrainConfig& cfg) {
  cfg.validate();
  ProblemSpec problem = base_problem;
  if (cfg.driver_mode) problem.driver_mode = *cfg.driver_mode;
  problem.validate();

  const Vector start = cfg.u0 ? *cfg.u0 : Vector::Zero(problem.dims.m);
  if (start.size() != problem.dims.m) throw ConfigError("u0 has the wrong dimension");

  TrainResult result;
  result.control = ControlPath(grid.steps(), project_box(problem.constraint, start));

  RandomStream rng(cfg.seed);
  RandomStream cost_rng(derive_seed(cfg.seed, 0xC057));

  auto snapshot = [&](long long k, double gnorm) {
    Snapshot s;
    s.iteration = k;
    s.control = result.control;
    s.gradient_norm = gnorm;
    if (cfg.cost_samples > 0) {
      const CostEstimate c = cost_monte_carlo(problem, grid, result.control, cfg.cost_samples, cost_rng);
      s.cost = c.mean;
      s.cost_se = c.standard_error;
    }
    result.snapshots.push_back(std::move(s));
  };

  double last_norm = 0.0;
  if (cfg.record_every > 0 && cfg.iterations > 0) snapshot(0, 0.0);
  for (long long k = 0; k < cfg.iterations; ++k) {
    try {
      const Vector gamma = problem.data_sampler(rng);
      const Vector x0 = problem.x0_sampler(rng);
      const NoisePath noise = sample_noise_path(grid, problem.dims.q, rng);
      last_norm = gradient_norm(
          sgd_step(problem, grid, cfg.scheme, result.control, noise, x0, gamma, cfg.step_size(k)));
    } catch (const DivergenceError& e) {
      throw TrainingAborted(k, e.what());
    } catch (const StepSizeError& e) {
      throw TrainingAborted(k, e.what());
    }
    if (cfg.record_every > 0 && (k + 1) % cfg.record_every == 0 && k + 1 < cfg.iterations) {
      snapshot(k + 1, last_norm);
    }
  }
  snapshot(cfg.iterations, last_norm);

  if (cfg.cost_samples > 0 && result.snapshots.size() >= 2) {
    bool decreased = false;
    for (std::size_t i = 1; i < result.snapshots.size(); ++i) {
      if (*result.snapshots[i].cost < *result.snapshots[i - 1].cost) decreased = true;
    }
    if (!decreased) result.warnings.emplace_back("diagnostic cost never decreased");
  }
  return result;
}

double path_cost(const ProblemSpec& problem, const TimeGrid& grid, const ControlPath& u,
                 const ForwardPath& fwd, const Vector& gamma) {
  if (!problem.phi) throw ConfigError("cost diagnostics need the terminal cost phi");
  double running = 0.0;
  for (int n = 0; n < grid.steps(); ++n) running += problem.r(grid.node(n), fwd[n], u[n]);
  return grid.h() * running + problem.phi(fwd[grid.steps()], gamma);
}

CostEstimate cost_monte_carlo(const ProblemSpec& problem, const TimeGrid& grid,
                              const ControlPath& u, long long samples, RandomStream& rng) {
  if (samples < 2) throw ConfigError("cost estimate needs at least two samples");
  CostEstimate out;
  double mean = 0.0, m2 = 0.0;
  long long used = 0;
  for (long long s = 0; s < samples; ++s) {
    const Vector gamma = problem.data_sampler(rng);
    const Vector x0 = problem.x0_sampler(rng);
    const NoisePath noise = sample_noise_path(grid, problem.dims.q, rng);
    double c = 0.0;
    try {
      c = path_cost(problem, grid, u, simulate_forward(problem, grid, u, noise, x0), gamma);
    } catch (const DivergenceError&) {
      ++out.excluded;
      continue;
    }
    if (!std::isfinite(c)) {
      ++out.excluded;
      continue;
    }
    // Welford
    ++used;
    const double delta = c - mean;
    mean += delta / static_cast<double>(used);
    m2 += delta * (c - mean);
  }
  if (out.excluded * 100 > samples) {
    throw Error("cost estimate excluded " + std::to_string(out.excluded) + " of " +
                std::to_string(samples) + " paths");
  }
  out.samples = used;
  out.mean = mean;
  out.standard_error = used > 1 ? std::sqrt(m2 / static_cast<double>(used - 1) / static_cast<double>(used)) : 0.0;
  return out;
}

GradientStatistics gradient_statistics(const ProblemSpec& problem, const TimeGrid& grid,
                                       const ControlPath& u, Scheme scheme, long long samples,
                                       std::uint64_t seed, const IncrementLaw& law) {
  if (samples < 2) throw ConfigError("gradient statistics need at least two samples");
  const auto nodes = static_cast<std::size_t>(grid.steps()) + 1;
  const int m = problem.dims.m;
  std::vector<Vector> sum(nodes, Vector::Zero(m)), sum2(nodes, Vector::Zero(m));
  RandomStream rng(seed);
  for (long long s = 0; s < samples; ++s) {
    const Vector gamma = problem.data_sampler(rng);
    const Vector x0 = problem.x0_sampler(rng);
    const NoisePath noise = sample_noise_path(grid, problem.dims.q, rng, law);
    const ForwardPath fwd = simulate_forward(problem, grid, u, noise, x0);
    const BackwardPath bwd = solve_backward(scheme, problem, grid, u, fwd, noise, gamma);
    const std::vector<Vector> g = estimate_gradient(problem, grid, u, fwd, bwd);
    for (std::size_t n = 0; n < nodes; ++n) {
      sum[n] += g[n];
      sum2[n] += g[n].cwiseAbs2();
    }
  }
  const double k = static_cast<double>(samples);
  GradientStatistics out;
  out.samples = samples;
  for (std::size_t n = 0; n < nodes; ++n) {
    const Vector mean = sum[n] / k;
    const Vector var = ((sum2[n] - k * mean.cwiseAbs2()) / (k - 1.0)).cwiseMax(0.0);
    out.mean.push_back(mean);
    out.standard_error.push_back((var / k).cwiseSqrt());
  }
  return out;
}

}  // namespace sdebp
