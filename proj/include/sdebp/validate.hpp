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

#ifndef SDEBP_VALIDATE_HPP
#define SDEBP_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdebp/oracle.hpp"

namespace sdebp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Sample means of Y_0 and Z_0 (column-major) over independent sample-wise passes.
struct InitialAdjointEstimate {
  OracleEstimate y0;
  OracleEstimate z0;
};

InitialAdjointEstimate samplewise_initial_adjoint(const ProblemSpec& problem, const TimeGrid& grid,
                                                  const ControlPath& u, Scheme scheme,
                                                  long long samples, std::uint64_t seed,
                                                  const IncrementLaw& law = {});

/// Largest |a - b| / sqrt(se_a^2 + se_b^2) over entries.
double max_combined_z(const OracleEstimate& a, const OracleEstimate& b);

struct RandomBoxTrial {
  double nonexpansive_excess = 0.0;  // max(0, |P v - P w| - |v - w|)
  double variational_excess = 0.0;   // max over y in box corners of (v - P v).(y - P v)
};

/// Worst violations over `trials` random (v, w, box) triples with dimensions 1..kMaxDim.
RandomBoxTrial projection_trials(long long trials, std::uint64_t seed);

struct ValidationOptions {
  bool quick = false;
  std::uint64_t seed = 20240;
  IncrementLaw law;  // replaced by IncrementLaw::tampered() to exercise the failure path
};

/// Increment law, unbiasedness at N = 2, finite-difference gradient agreement,
/// projection properties and benchmark derivative checks. Quick mode uses 1e4
/// draws and 6-SE bands.
std::vector<CheckResult> run_validation(const ValidationOptions& options);

/// (node, component) pairs compared against finite differences on Example 1, N = 4.
std::vector<std::pair<int, int>> gradient_check_pairs();

}  // namespace sdebp

#endif  // SDEBP_VALIDATE_HPP
