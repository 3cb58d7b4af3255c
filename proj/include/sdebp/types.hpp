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

#ifndef SDEBP_TYPES_HPP
#define SDEBP_TYPES_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/container/static_vector.hpp>

namespace sdebp {

// State, control and noise dimensions are small and dense. Vectors and
// matrices carry inline storage up to kMaxDim so the inner loops never touch
// the heap.
inline constexpr int kMaxDim = 4;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                             kMaxDim, kMaxDim>;

/// One Jacobian per noise column, e.g. d sigma(:, j) / dx for j = 0..q-1.
using JacobianStack = boost::container::static_vector<Matrix, kMaxDim>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid dimensions, grids, boxes or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A forward or backward pass produced a non-finite value.
class DivergenceError : public Error {
 public:
  enum class Kind { path, adjoint };

  DivergenceError(Kind kind, int step, const std::string& what)
      : Error(what), kind_(kind), step_(step) {}

  Kind kind() const { return kind_; }
  int step() const { return step_; }

 private:
  Kind kind_;
  int step_;
};

/// The implicit matrix I - (h/2) b_x^T is singular or badly conditioned.
class StepSizeError : public Error {
 public:
  StepSizeError(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Random stream owned by exactly one worker. Wraps the engine together with
/// its normal distribution, which caches a second variate between calls.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based seed for cell (a, b, c) under a master seed:
/// mix64(mix64(mix64(master ^ 0x9E37...) ^ a) ^ b) ^ c, finalized once more.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace sdebp

#endif  // SDEBP_TYPES_HPP
