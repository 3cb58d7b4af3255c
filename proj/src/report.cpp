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

#include "sdebp/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sdebp {

void RunManifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

const std::string* RunManifest::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void RunManifest::write(std::ostream& os) const {
  for (const auto& [k, v] : entries) os << "# " << k << ": " << v << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  // snprintf honours the C locale, which always uses '.'.
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

void write_control_csv(std::ostream& os, const RunManifest& manifest, const TimeGrid& grid,
                       const ControlPath& u, const TimeFn& exact) {
  if (u.steps() != grid.steps()) throw ConfigError("control and grid disagree on N");
  const int m = static_cast<int>(u[0].size());
  manifest.write(os);
  os << 't';
  for (int i = 1; i <= m; ++i) os << ",u_num_" << i;
  if (exact) {
    for (int i = 1; i <= m; ++i) os << ",u_exact_" << i;
  }
  os << '\n';
  for (int n = 0; n <= grid.steps(); ++n) {
    const double t = grid.node(n);
    os << format_double(t);
    for (int i = 0; i < m; ++i) os << ',' << format_double(u[n][i]);
    if (exact) {
      const Vector e = exact(t);
      for (int i = 0; i < m; ++i) os << ',' << format_double(e[i]);
    }
    os << '\n';
  }
}

void write_converge_csv(std::ostream& os, const RunManifest& manifest,
                        const ConvergenceReport& report) {
  manifest.write(os);
  os << "N,K,runs,rmse_mean,rmse_std\n";
  for (const auto& row : report.rows) {
    os << row.n << ',' << row.k << ',' << row.runs - row.aborted << ',' << format_double(row.rmse_mean)
       << ',' << format_double(row.rmse_std) << '\n';
  }
  os << "slope," << format_double(report.slope) << ",slope_stderr,"
     << format_double(report.slope_stderr) << ",\n";
}

void write_runs_csv(std::ostream& os, const RunManifest& manifest,
                    const ConvergenceReport& report) {
  manifest.write(os);
  os << "N,run,seed,rmse\n";
  for (const auto& row : report.rows) {
    for (std::size_t r = 0; r < row.errors.size(); ++r) {
      os << row.n << ',' << r << ',' << (r < row.seeds.size() ? row.seeds[r] : 0) << ',';
      if (!std::isnan(row.errors[r])) os << format_double(row.errors[r]);
      os << '\n';
    }
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path);
}

std::vector<std::string> data_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] == '#') continue;
    rows.push_back(line);
  }
  return rows;
}

}  // namespace sdebp
