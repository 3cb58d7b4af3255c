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

#include "sdebp/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdebp/parallel.hpp"

namespace sdebp {

namespace {

Vector constant_sampler_value(int n, double v) { return Vector::Constant(n, v); }

Sampler degenerate_sampler(Vector value) {
  return [value = std::move(value)](RandomStream&) { return value; };
}

// Diagonal matrix of a vector, in the inline-storage matrix type.
Matrix diag(const Vector& v) {
  Matrix m = Matrix::Zero(v.size(), v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) m(i, i) = v[i];
  return m;
}

// Unit-diagonal selector e_j e_j^T scaled by s, for each j.
JacobianStack selector_stack(int p, int m, double s) {
  JacobianStack out;
  for (int j = 0; j < p; ++j) {
    Matrix e = Matrix::Zero(p, m);
    e(j, j) = s;
    out.push_back(e);
  }
  return out;
}

JacobianStack zero_stack(int p, int cols, int q) {
  return JacobianStack(static_cast<std::size_t>(q), Matrix::Zero(p, cols));
}

Vector select(const Vector& full, const std::vector<int>& components) {
  Vector out(static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < components.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[components[i]];
  return out;
}

Benchmark make_example1(double sigma, std::vector<int> components) {
  if (!(sigma > 0.0)) throw ConfigError("example1 needs sigma > 0");
  const Example1Constants c(sigma);
  const int p = static_cast<int>(components.size());

  Benchmark bm;
  bm.horizon = 1.0;
  bm.label = p == 2 ? "example1" : "example1/component" + std::to_string(components[0] + 1);
  bm.exact_control = [c, components](double t) { return select(c.control(t), components); };
  bm.target = [c, components](double t) { return select(c.target(t), components); };

  ProblemSpec& ps = bm.problem;
  ps.dims = {p, p, p};
  ps.b = [c, components](double t, const Vector&, const Vector& u) {
    return Vector(u - select(c.drift_shift(t), components));
  };
  ps.sigma = [sigma](double, const Vector&, const Vector& u) { return Matrix(sigma * diag(u)); };
  ps.r = [c, components](double t, const Vector& x, const Vector& u) {
    return 0.5 * (x - select(c.target(t), components)).squaredNorm() + 0.5 * u.squaredNorm();
  };
  ps.phi = [](const Vector& x, const Vector&) { return 0.5 * x.squaredNorm(); };
  ps.phi_x = [](const Vector& x, const Vector&) { return x; };
  ps.phi_xx = [p](const Vector&, const Vector&) { return Matrix(Matrix::Identity(p, p)); };
  ps.b_x = [p](double, const Vector&, const Vector&) { return Matrix(Matrix::Zero(p, p)); };
  ps.b_u = [p](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(p, p)); };
  ps.sigma_x = [p](double, const Vector&, const Vector&) { return zero_stack(p, p, p); };
  ps.sigma_u = [p, sigma](double, const Vector&, const Vector&) { return selector_stack(p, p, sigma); };
  ps.r_x = [c, components](double t, const Vector& x, const Vector&) {
    return Vector(x - select(c.target(t), components));
  };
  ps.r_u = [](double, const Vector&, const Vector& u) { return u; };
  ps.driver_mode = DriverMode::restricted;
  ps.constraint = Box::unbounded(p);
  ps.data_sampler = degenerate_sampler(Vector::Zero(1));
  ps.x0_sampler = degenerate_sampler(Vector::Zero(p));
  return bm;
}

}  // namespace

Example1Constants::Example1Constants(double s) : sigma(s) {
  const double s2 = s * s;
  const double ell = std::log(1.0 + s2 / (1.0 + s2));
  d = ell / (s2 + ell);
  terminal_mean = Vector(2);
  terminal_mean << d / 2.0, d * std::sin(1.0);
}

double Example1Constants::beta(double t) const {
  const double s2 = sigma * sigma;
  return (1.0 + s2) + s2 * (1.0 - t);
}

double Example1Constants::alpha(double t) const {
  const double s2 = sigma * sigma;
  return std::log((1.0 + 2.0 * s2) / (s2 * (2.0 - t) + 1.0));
}

Vector Example1Constants::drift_shift(double t) const {
  const double bt = beta(t);
  Vector a(2);
  a << -t * t / (2.0 * bt), -std::sin(t) / bt;
  return a;
}

Vector Example1Constants::target(double t) const {
  const double s2 = sigma * sigma;
  const double at = alpha(t);
  Vector x(2);
  x << t + at * (0.5 - terminal_mean[0]) / s2, std::cos(t) + at * (std::sin(1.0) - terminal_mean[1]) / s2;
  return x;
}

Vector Example1Constants::control(double t) const {
  constexpr double horizon = 1.0;
  const double bt = beta(t);
  Vector u(2);
  u << (-t * t / 2.0 + horizon * horizon / 2.0 - terminal_mean[0]) / bt,
      (-std::sin(t) + std::sin(1.0) - terminal_mean[1]) / bt;
  return u;
}

Benchmark example1_problem(double sigma) { return make_example1(sigma, {0, 1}); }

Benchmark example1_component(double sigma, int component) {
  if (component != 0 && component != 1) throw ConfigError("example1 has components 0 and 1");
  return make_example1(sigma, {component});
}

Benchmark example2_problem(double sigma, double x0) {
  if (!(sigma > 0.0)) throw ConfigError("example2 needs sigma > 0");
  if (!(x0 > 0.0)) throw ConfigError("example2 needs x0 > 0");
  constexpr double horizon = 1.0;
  const double eT = std::exp(-horizon);

  auto den1 = [x0](double t) { return 1.0 / x0 - horizon * t + t * t / 2.0; };
  auto den2 = [x0, eT](double t) { return 1.0 / x0 + 1.0 - std::exp(-t) - t * eT; };
  for (int i = 0; i <= 1000; ++i) {
    const double t = horizon * i / 1000.0;
    if (!(den1(t) > 0.0) || !(den2(t) > 0.0)) {
      throw ConfigError("example2 closed-form control has a nonpositive denominator for this x0");
    }
  }

  Benchmark bm;
  bm.horizon = horizon;
  bm.label = "example2";
  bm.exact_control = [den1, den2, eT](double t) {
    Vector u(2);
    u << (horizon - t) / den1(t), (eT - std::exp(-t)) / den2(t);
    return u;
  };
  bm.target = [sigma, den1, den2, eT](double t) {
    const double growth = std::exp(sigma * sigma * t);
    const double g2 = eT - std::exp(-t);
    Vector x(2);
    x << (growth - (horizon - t) * (horizon - t)) / den1(t) + 1.0,
        (growth - g2 * g2) / den2(t) - std::exp(-t);
    return x;
  };

  const TimeFn target = bm.target;
  ProblemSpec& ps = bm.problem;
  ps.dims = {2, 2, 2};
  ps.b = [](double, const Vector& x, const Vector& u) { return Vector(u.cwiseProduct(x)); };
  ps.sigma = [sigma](double, const Vector& x, const Vector&) { return Matrix(sigma * diag(x)); };
  ps.r = [target](double t, const Vector& x, const Vector& u) {
    return 0.5 * (x - target(t)).squaredNorm() + 0.5 * u.squaredNorm();
  };
  ps.phi = [](const Vector&, const Vector&) { return 0.0; };
  ps.phi_x = [](const Vector& x, const Vector&) { return Vector(Vector::Zero(x.size())); };
  ps.phi_xx = [](const Vector& x, const Vector&) { return Matrix(Matrix::Zero(x.size(), x.size())); };
  ps.b_x = [](double, const Vector&, const Vector& u) { return diag(u); };
  ps.b_u = [](double, const Vector& x, const Vector&) { return diag(x); };
  ps.sigma_x = [sigma](double, const Vector&, const Vector&) { return selector_stack(2, 2, sigma); };
  ps.sigma_u = [](double, const Vector&, const Vector&) { return zero_stack(2, 2, 2); };
  ps.r_x = [target](double t, const Vector& x, const Vector&) { return Vector(x - target(t)); };
  ps.r_u = [](double, const Vector&, const Vector& u) { return u; };
  ps.driver_mode = DriverMode::general;
  ps.constraint = Box::unbounded(2);
  ps.data_sampler = degenerate_sampler(Vector::Zero(1));
  ps.x0_sampler = degenerate_sampler(constant_sampler_value(2, x0));
  return bm;
}

Benchmark linear_test_problem(double sigma, double x0) {
  Benchmark bm;
  bm.horizon = 1.0;
  bm.label = "linear";
  bm.exact_control = [](double) { return Vector(Vector::Constant(1, std::numeric_limits<double>::quiet_NaN())); };
  bm.target = [](double) { return Vector(Vector::Zero(1)); };

  ProblemSpec& ps = bm.problem;
  ps.dims = {1, 1, 1};
  ps.b = [](double, const Vector&, const Vector& u) { return u; };
  ps.sigma = [sigma](double, const Vector&, const Vector&) { return Matrix(Matrix::Constant(1, 1, sigma)); };
  ps.r = [](double, const Vector& x, const Vector& u) { return 0.5 * (x.squaredNorm() + u.squaredNorm()); };
  ps.phi = [](const Vector& x, const Vector&) { return 0.5 * x.squaredNorm(); };
  ps.phi_x = [](const Vector& x, const Vector&) { return x; };
  ps.phi_xx = [](const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); };
  ps.b_x = [](double, const Vector&, const Vector&) { return Matrix(Matrix::Zero(1, 1)); };
  ps.b_u = [](double, const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); };
  ps.sigma_x = [](double, const Vector&, const Vector&) { return zero_stack(1, 1, 1); };
  ps.sigma_u = [](double, const Vector&, const Vector&) { return zero_stack(1, 1, 1); };
  ps.r_x = [](double, const Vector& x, const Vector&) { return x; };
  ps.r_u = [](double, const Vector&, const Vector& u) { return u; };
  ps.driver_mode = DriverMode::restricted;
  ps.constraint = Box::unbounded(1);
  ps.data_sampler = degenerate_sampler(Vector::Zero(1));
  ps.x0_sampler = degenerate_sampler(constant_sampler_value(1, x0));
  return bm;
}

Benchmark benchmark_by_name(const std::string& name, double sigma, double x0) {
  if (name == "example1") return example1_problem(sigma);
  if (name == "example2") return example2_problem(sigma, x0);
  throw ConfigError("unknown benchmark '" + name + "'");
}

ControlPath sample_control(const TimeFn& exact, const TimeGrid& grid) {
  ControlPath u;
  u.values.reserve(static_cast<std::size_t>(grid.steps()) + 1);
  for (int n = 0; n <= grid.steps(); ++n) u.values.push_back(exact(grid.node(n)));
  return u;
}

double rmse(const ControlPath& u, const TimeFn& exact, const TimeGrid& grid) {
  if (u.steps() != grid.steps()) throw ConfigError("control and grid disagree on N");
  double sum = 0.0;
  for (int n = 0; n <= grid.steps(); ++n) {
    sum += (u[n] - exact(grid.node(n))).squaredNorm() / static_cast<double>(u[n].size());
  }
  return std::sqrt(sum / (grid.steps() + 1));
}

SlopeFit fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& value) {
  if (n.size() != value.size() || n.size() < 2) throw ConfigError("slope fit needs >= 2 points");
  const auto count = static_cast<double>(n.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(value[i] > 0.0)) throw ConfigError("slope fit needs positive data");
    mx += std::log(n[i]);
    my += std::log(value[i]);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(value[i]) - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double res = std::log(value[i]) - (fit.intercept + fit.slope * std::log(n[i]));
      rss += res * res;
    }
    fit.slope_stderr = std::sqrt(rss / (count - 2.0) / sxx);
  }
  return fit;
}

std::uint64_t cell_seed(std::uint64_t master, int n, int run) {
  return derive_seed(master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(run));
}

long long iterations_for(int n, double c_iter) {
  return std::llround(c_iter * static_cast<double>(n) * n * n);
}

ConvergenceReport summarize_study(const std::vector<int>& n_list, const std::vector<long long>& k_list,
                                  const std::vector<std::vector<double>>& errors) {
  ConvergenceReport report;
  std::vector<double> ns, means;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    ConvergenceRow row;
    row.n = n_list[i];
    row.k = k_list[i];
    row.runs = static_cast<int>(errors[i].size());
    row.errors = errors[i];
    double sum2 = 0.0, sum = 0.0;
    int done = 0;
    for (double e : errors[i]) {
      if (std::isnan(e)) {
        ++row.aborted;
        continue;
      }
      sum += e;
      sum2 += e * e;
      ++done;
    }
    if (row.aborted * 10 > row.runs) {
      throw StudyFailed("N = " + std::to_string(row.n) + ": " + std::to_string(row.aborted) + " of " +
                        std::to_string(row.runs) + " training runs aborted");
    }
    row.rmse_mean = std::sqrt(sum2 / done);
    const double mean = sum / done;
    double var = 0.0;
    for (double e : errors[i]) {
      if (!std::isnan(e)) var += (e - mean) * (e - mean);
    }
    row.rmse_std = done > 1 ? std::sqrt(var / (done - 1)) : 0.0;
    ns.push_back(row.n);
    means.push_back(row.rmse_mean);
    report.rows.push_back(std::move(row));
  }
  const SlopeFit fit = fit_loglog_slope(ns, means);
  report.slope = fit.slope;
  report.slope_stderr = fit.slope_stderr;
  return report;
}

ConvergenceReport convergence_study(const Benchmark& benchmark, const StudyConfig& cfg) {
  if (cfg.runs < 2) throw ConfigError("convergence study needs runs >= 2");
  if (cfg.n_list.empty()) throw ConfigError("convergence study needs at least one N");
  if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()) ||
      std::adjacent_find(cfg.n_list.begin(), cfg.n_list.end()) != cfg.n_list.end()) {
    throw ConfigError("N list must be strictly ascending");
  }
  if (!(cfg.c_iter > 0.0)) throw ConfigError("c_iter must be positive");

  const std::size_t rows = cfg.n_list.size();
  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<long long> k_list;
  for (int n : cfg.n_list) k_list.push_back(iterations_for(n, cfg.c_iter));
  std::vector<std::vector<double>> errors(rows, std::vector<double>(runs, 0.0));

  // Largest N first so the longest cells start early.
  std::vector<std::size_t> order(rows * runs);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;

  parallel_for(
      order.size(),
      [&](std::size_t slot) {
        const std::size_t cell = order[slot];
        const std::size_t row = cell / runs, run = cell % runs;
        const int n = cfg.n_list[row];
        const TimeGrid grid(benchmark.horizon, n);
        TrainConfig tc = cfg.train;
        tc.iterations = k_list[row];
        tc.seed = cell_seed(cfg.master_seed, n, static_cast<int>(run));
        tc.record_every = 0;
        tc.cost_samples = 0;
        try {
          const TrainResult res = train(benchmark.problem, grid, tc);
          errors[row][run] = rmse(res.control, benchmark.exact_control, grid);
        } catch (const TrainingAborted&) {
          errors[row][run] = std::numeric_limits<double>::quiet_NaN();
        }
      },
      resolve_thread_count(cfg.threads));

  ConvergenceReport report = summarize_study(cfg.n_list, k_list, errors);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t r = 0; r < runs; ++r) {
      report.rows[i].seeds.push_back(cell_seed(cfg.master_seed, cfg.n_list[i], static_cast<int>(r)));
    }
  }
  return report;
}

}  // namespace sdebp
