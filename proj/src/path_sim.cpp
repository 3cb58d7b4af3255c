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

#include "sdebp/path_sim.hpp"

namespace sdebp {

IncrementPair increment_from_normals(double h, const Vector& xi1, const Vector& xi2,
                                     const IncrementLaw& law) {
  if (!(h > 0.0)) throw ConfigError("increment step h must be positive");
  const double s = std::sqrt(h);
  return {s * xi1, s * (law.shared * xi1 + law.independent * xi2)};
}

IncrementPair sample_increment_pair(double h, int q, RandomStream& rng,
                                    const IncrementLaw& law) {
  Vector xi1(q), xi2(q);
  for (int j = 0; j < q; ++j) {
    xi1[j] = rng.normal();
    xi2[j] = rng.normal();
  }
  return increment_from_normals(h, xi1, xi2, law);
}

NoisePath::NoisePath(int steps, int q)
    : q_(q),
      omega_(static_cast<std::size_t>(steps), Vector::Zero(q)),
      omega_tilde_(static_cast<std::size_t>(steps), Vector::Zero(q)) {}

void NoisePath::set(int n, IncrementPair pair) {
  omega_[index(n)] = std::move(pair.omega);
  omega_tilde_[index(n)] = std::move(pair.omega_tilde);
}

NoisePath sample_noise_path(const TimeGrid& grid, int q, RandomStream& rng,
                            const IncrementLaw& law) {
  NoisePath noise(grid.steps(), q);
  for (int n = 1; n <= grid.steps(); ++n) noise.set(n, sample_increment_pair(grid.h(), q, rng, law));
  return noise;
}

ForwardPath simulate_forward(const ProblemSpec& problem, const TimeGrid& grid,
                             const ControlPath& u, const NoisePath& noise, const Vector& x0) {
  const int steps = grid.steps();
  if (u.steps() != steps || noise.steps() != steps) {
    throw ConfigError("control, noise and grid disagree on N");
  }
  if (x0.size() != problem.dims.p || noise.q() != problem.dims.q) {
    throw ConfigError("initial state or noise has the wrong dimension");
  }

  const double h = grid.h();
  ForwardPath path;
  path.x.resize(static_cast<std::size_t>(steps) + 1);
  path.x[0] = x0;
  for (int n = 0; n < steps; ++n) {
    const double t = grid.node(n);
    const Vector& xn = path[n];
    Vector next = xn + h * problem.b(t, xn, u[n]) + problem.sigma(t, xn, u[n]) * noise.omega(n + 1);
    if (!next.allFinite()) {
      throw DivergenceError(DivergenceError::Kind::path, n + 1,
                            "forward path diverged at step " + std::to_string(n + 1));
    }
    path.x[static_cast<std::size_t>(n) + 1] = std::move(next);
  }
  return path;
}

}  // namespace sdebp
