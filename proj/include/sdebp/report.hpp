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

#ifndef SDEBP_REPORT_HPP
#define SDEBP_REPORT_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sdebp/benchmarks.hpp"

namespace sdebp {

inline constexpr const char* kVersion = "0.1.0";

/// Run description written as `# key: value` lines at the top of every CSV.
/// Entries keep insertion order.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  const std::string* find(const std::string& key) const;
  void write(std::ostream& os) const;
};

/// Shortest round-trip is not required; always 17 significant digits, '.' separator.
std::string format_double(double v);

/// Comma list of integers, e.g. "10,14,20".
std::string join_ints(const std::vector<int>& values);

/// Columns t, u_num_1..u_num_m and, when `exact` is callable, u_exact_1..u_exact_m.
void write_control_csv(std::ostream& os, const RunManifest& manifest, const TimeGrid& grid,
                       const ControlPath& u, const TimeFn& exact);

/// Columns N,K,runs,rmse_mean,rmse_std and a footer row
/// `slope,<slope>,slope_stderr,<stderr>,`.
void write_converge_csv(std::ostream& os, const RunManifest& manifest,
                        const ConvergenceReport& report);

/// One row per (N, run): N,run,seed,rmse (empty rmse for aborted runs).
void write_runs_csv(std::ostream& os, const RunManifest& manifest,
                    const ConvergenceReport& report);

/// Writes `content` to `path`, throwing Error on failure.
void write_file(const std::string& path, const std::string& content);

/// Lines of a CSV file that are not manifest comments.
std::vector<std::string> data_rows(const std::string& path);

}  // namespace sdebp

#endif  // SDEBP_REPORT_HPP
