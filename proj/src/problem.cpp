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

#include "sdebp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdebp {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

void Dims::validate() const {
  if (p < 1 || m < 1 || q < 1) throw ConfigError("dimensions must be >= 1");
  if (p > kMaxDim || m > kMaxDim || q > kMaxDim) {
    throw ConfigError("dimensions above " + std::to_string(kMaxDim) + " are not supported");
  }
}

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time horizon must be positive and finite");
  }
  if (steps < 2) throw ConfigError("time grid needs N >= 2");
  h_ = horizon / steps;
}

double TimeGrid::node(int n) const {
  if (n == steps_) return horizon_;
  return n * h_;
}

Box::Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw ConfigError("box bounds differ in length");
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (std::isnan(lo_[i]) || std::isnan(hi_[i]) || lo_[i] > hi_[i]) {
      throw ConfigError("box component " + std::to_string(i) + " is empty");
    }
  }
}

Box Box::unbounded(int m) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box(Vector::Constant(m, -inf), Vector::Constant(m, inf));
}

Box Box::uniform(int m, double lo, double hi) {
  return Box(Vector::Constant(m, lo), Vector::Constant(m, hi));
}

bool Box::contains(const Vector& v) const {
  if (v.size() != lo_.size()) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lo_[i] && v[i] <= hi_[i])) return false;
  }
  return true;
}

Vector project_box(const Box& box, const Vector& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = std::clamp(v[i], box.lo()[i], box.hi()[i]);
  }
  return out;
}

std::string to_string(DriverMode mode) {
  return mode == DriverMode::general ? "general" : "restricted";
}

DriverMode parse_driver_mode(const std::string& text) {
  if (text == "restricted") return DriverMode::restricted;
  if (text == "general") return DriverMode::general;
  throw ConfigError("unknown driver mode '" + text + "'");
}

void ProblemSpec::validate() const {
  dims.validate();
  if (!b || !sigma || !r || !phi_x || !b_x || !b_u || !sigma_u || !r_x || !r_u) {
    throw ConfigError("problem is missing a coefficient or derivative");
  }
  if (driver_mode == DriverMode::general && !sigma_x) {
    throw ConfigError("general driver mode needs sigma_x");
  }
  if (!data_sampler || !x0_sampler) throw ConfigError("problem is missing a sampler");
  if (constraint.size() != dims.m) {
    throw ConfigError("constraint box has the wrong dimension");
  }
}

ControlPath::ControlPath(int steps, const Vector& fill)
    : values(static_cast<std::size_t>(steps) + 1, fill) {}

bool DerivativeReport::ok() const {
  return std::all_of(fields.begin(), fields.end(),
                     [](const DerivativeFieldReport& f) { return f.passed; });
}

const DerivativeFieldReport& DerivativeReport::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return f;
  }
  throw ConfigError("no derivative field named '" + name + "'");
}

namespace {

double fd_step(double v) { return 1e-6 * (1.0 + std::abs(v)); }

template <typename M>
bool all_finite(const M& m) {
  return m.allFinite();
}

// Accumulates per-field maxima.
class FieldTracker {
 public:
  FieldTracker(std::string name, double tol) { report_.name = std::move(name), tol_ = tol; }

  template <typename A, typename B>
  void record(const A& analytic, const B& fd) {
    if (analytic.rows() != fd.rows() || analytic.cols() != fd.cols()) {
      ++report_.shape_mismatch;
      return;
    }
    if (!all_finite(analytic) || !all_finite(fd)) {
      ++report_.nonfinite;
      return;
    }
    const double denom = std::max(fd.norm(), 1e-6);
    report_.max_rel_error = std::max(report_.max_rel_error, (analytic - fd).norm() / denom);
  }

  void shape_mismatch() { ++report_.shape_mismatch; }

  DerivativeFieldReport finish() {
    report_.passed = report_.nonfinite == 0 && report_.shape_mismatch == 0 && report_.max_rel_error <= tol_;
    return report_;
  }

 private:
  DerivativeFieldReport report_;
  double tol_ = 0.0;
};

Vector random_vector(int n, double scale, RandomStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

DerivativeReport check_derivatives(const ProblemSpec& problem,
                                   const DerivativeCheckOptions& options) {
  problem.validate();
  if (options.trials < 1) throw ConfigError("derivative check needs at least one trial");

  const auto [p, m, q] = problem.dims;
  RandomStream rng(options.seed);

  FieldTracker bx("b_x", options.tol), bu("b_u", options.tol), sx("sigma_x", options.tol),
      su("sigma_u", options.tol), rx("r_x", options.tol), ru("r_u", options.tol),
      px("phi_x", options.tol), pxx("phi_xx", options.tol);

  for (int trial = 0; trial < options.trials; ++trial) {
    const double t = rng.uniform(0.0, options.t_max);
    const Vector x = random_vector(p, options.scale, rng);
    const Vector u = random_vector(m, options.scale, rng);
    const Vector gamma = problem.data_sampler(rng);

    // Jacobians with respect to x.
    {
      Matrix fd_bx(p, p);
      JacobianStack fd_sx(static_cast<std::size_t>(q), Matrix::Zero(p, p));
      Vector fd_rx(p);
      Vector fd_px(p);
      Matrix fd_pxx(p, p);
      for (int i = 0; i < p; ++i) {
        const double d = fd_step(x[i]);
        Vector xp = x, xm = x;
        xp[i] += d;
        xm[i] -= d;
        fd_bx.col(i) = (problem.b(t, xp, u) - problem.b(t, xm, u)) / (2 * d);
        const Matrix sp = problem.sigma(t, xp, u), sm = problem.sigma(t, xm, u);
        for (int j = 0; j < q; ++j) fd_sx[j].col(i) = (sp.col(j) - sm.col(j)) / (2 * d);
        fd_rx[i] = (problem.r(t, xp, u) - problem.r(t, xm, u)) / (2 * d);
        if (problem.phi) fd_px[i] = (problem.phi(xp, gamma) - problem.phi(xm, gamma)) / (2 * d);
        fd_pxx.col(i) = (problem.phi_x(xp, gamma) - problem.phi_x(xm, gamma)) / (2 * d);
      }
      bx.record(problem.b_x(t, x, u), fd_bx);
      rx.record(problem.r_x(t, x, u), fd_rx);
      if (problem.phi) px.record(problem.phi_x(x, gamma), fd_px);
      if (problem.phi_xx) pxx.record(problem.phi_xx(x, gamma), fd_pxx);
      if (problem.sigma_x) {
        const JacobianStack an = problem.sigma_x(t, x, u);
        if (static_cast<int>(an.size()) != q) {
          sx.shape_mismatch();
        } else {
          for (int j = 0; j < q; ++j) sx.record(an[j], fd_sx[j]);
        }
      }
    }

    // Jacobians with respect to u.
    {
      Matrix fd_bu(p, m);
      JacobianStack fd_su(static_cast<std::size_t>(q), Matrix::Zero(p, m));
      Vector fd_ru(m);
      for (int i = 0; i < m; ++i) {
        const double d = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += d;
        um[i] -= d;
        fd_bu.col(i) = (problem.b(t, x, up) - problem.b(t, x, um)) / (2 * d);
        const Matrix sp = problem.sigma(t, x, up), sm = problem.sigma(t, x, um);
        for (int j = 0; j < q; ++j) fd_su[j].col(i) = (sp.col(j) - sm.col(j)) / (2 * d);
        fd_ru[i] = (problem.r(t, x, up) - problem.r(t, x, um)) / (2 * d);
      }
      bu.record(problem.b_u(t, x, u), fd_bu);
      ru.record(problem.r_u(t, x, u), fd_ru);
      const JacobianStack an = problem.sigma_u(t, x, u);
      if (static_cast<int>(an.size()) != q) {
        su.shape_mismatch();
      } else {
        for (int j = 0; j < q; ++j) su.record(an[j], fd_su[j]);
      }
    }
  }

  DerivativeReport report;
  report.fields = {bx.finish(), bu.finish(), rx.finish(), ru.finish(), su.finish()};
  if (problem.sigma_x) report.fields.push_back(sx.finish());
  if (problem.phi) report.fields.push_back(px.finish());
  if (problem.phi_xx) report.fields.push_back(pxx.finish());
  return report;
}

}  // namespace sdebp
