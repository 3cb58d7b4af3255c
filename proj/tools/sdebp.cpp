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

// sdebp train | converge | validate

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdebp/benchmarks.hpp"
#include "sdebp/parallel.hpp"
#include "sdebp/report.hpp"
#include "sdebp/validate.hpp"

namespace {

struct Flags {
  std::string benchmark = "example1";
  int n = 50;
  long long k = -1;
  double c_iter = 0.2;
  std::vector<int> n_list;
  int runs = 30;
  double sigma = -1;  // benchmark default when negative
  double x0 = 1.0;
  double theta = 2.0;
  double m = 50.0;
  std::string scheme = "high-order";
  std::string driver;
  std::uint64_t seed = 2024;
  std::string out = ".";
  bool paper_scale = false;
  bool quick = false;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

double default_sigma(const std::string& benchmark) { return benchmark == "example2" ? 0.1 : 0.5; }

sdebp::RunManifest base_manifest(const std::string& sub, const Flags& f, double sigma,
                                 const sdebp::TrainConfig& tc) {
  sdebp::RunManifest m;
  m.set("subcommand", sub);
  m.set("benchmark", f.benchmark);
  m.set("sigma", sdebp::format_double(sigma));
  m.set("x0", sdebp::format_double(f.x0));
  m.set("theta", sdebp::format_double(tc.theta));
  m.set("M", sdebp::format_double(tc.offset));
  m.set("scheme", sdebp::to_string(tc.scheme));
  m.set("driver", tc.driver_mode ? sdebp::to_string(*tc.driver_mode) : "default");
  m.set("u0", "0");
  m.set("seed", std::to_string(f.seed));
  m.set("timestamp", timestamp());
  m.set("version", sdebp::kVersion);
  return m;
}

std::string rerun_command(const std::string& sub, const Flags& f, double sigma, const std::string& extra) {
  std::ostringstream os;
  os << "sdebp " << sub << " --benchmark " << f.benchmark << " --sigma " << sdebp::format_double(sigma)
     << " --x0 " << sdebp::format_double(f.x0) << " --theta " << sdebp::format_double(f.theta) << " --M "
     << sdebp::format_double(f.m) << " --scheme " << f.scheme;
  if (!f.driver.empty()) os << " --driver " << f.driver;
  os << " --seed " << f.seed << extra;
  return os.str();
}

sdebp::TrainConfig train_config(const Flags& f) {
  sdebp::TrainConfig tc;
  tc.theta = f.theta;
  tc.offset = f.m;
  tc.scheme = sdebp::parse_scheme(f.scheme);
  if (!f.driver.empty()) tc.driver_mode = sdebp::parse_driver_mode(f.driver);
  return tc;
}

int cmd_train(const Flags& f) {
  const double sigma = f.sigma < 0 ? default_sigma(f.benchmark) : f.sigma;
  const sdebp::Benchmark bench = sdebp::benchmark_by_name(f.benchmark, sigma, f.x0);
  sdebp::TrainConfig tc = train_config(f);
  tc.iterations = f.k >= 0 ? f.k : sdebp::iterations_for(f.n, f.c_iter);
  tc.seed = f.seed;
  const sdebp::TimeGrid grid(bench.horizon, f.n);
  const sdebp::TrainResult result = sdebp::train(bench.problem, grid, tc);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  const std::string path = (std::filesystem::path(f.out) / "control.csv").string();
  sdebp::RunManifest m = base_manifest("train", f, sigma, tc);
  m.set("N", std::to_string(f.n));
  m.set("K", std::to_string(tc.iterations));
  m.set("output", path);
  m.set("command", rerun_command("train", f, sigma,
                                 " --N " + std::to_string(f.n) + " --K " + std::to_string(tc.iterations)));
  std::ostringstream csv;
  sdebp::write_control_csv(csv, m, grid, result.control, bench.exact_control);
  sdebp::write_file(path, csv.str());
  std::cout << "wrote " << path << " (rmse " << sdebp::rmse(result.control, bench.exact_control, grid)
            << ")\n";
  return 0;
}

int cmd_converge(const Flags& f) {
  if (f.runs < 2) throw sdebp::ConfigError("--runs must be at least 2");
  const double sigma = f.sigma < 0 ? default_sigma(f.benchmark) : f.sigma;
  const sdebp::Benchmark bench = sdebp::benchmark_by_name(f.benchmark, sigma, f.x0);
  sdebp::StudyConfig sc;
  if (f.paper_scale) sc.n_list = {20, 30, 40, 50, 60, 70};
  if (!f.n_list.empty()) sc.n_list = f.n_list;
  sc.c_iter = f.c_iter;
  sc.runs = f.runs;
  sc.train = train_config(f);
  sc.master_seed = f.seed;
  sc.threads = sdebp::resolve_thread_count();
  const sdebp::ConvergenceReport report = sdebp::convergence_study(bench, sc);

  const std::string path = (std::filesystem::path(f.out) / "converge.csv").string();
  const std::string runs_path = (std::filesystem::path(f.out) / "converge_runs.csv").string();
  sdebp::RunManifest m = base_manifest("converge", f, sigma, sc.train);
  m.set("N_list", sdebp::join_ints(sc.n_list));
  m.set("c_iter", sdebp::format_double(sc.c_iter));
  m.set("runs", std::to_string(sc.runs));
  m.set("master_seed", std::to_string(sc.master_seed));
  m.set("seed_rule", "derive_seed(master_seed, N, run), splitmix64 chain");
  m.set("output", path + ";" + runs_path);
  m.set("command", rerun_command("converge", f, sigma,
                                 " --N-list " + sdebp::join_ints(sc.n_list) + " --c-iter " +
                                     sdebp::format_double(sc.c_iter) + " --runs " + std::to_string(sc.runs)));
  std::ostringstream csv, runs_csv;
  sdebp::write_converge_csv(csv, m, report);
  sdebp::write_runs_csv(runs_csv, m, report);
  sdebp::write_file(path, csv.str());
  sdebp::write_file(runs_path, runs_csv.str());
  for (const auto& row : report.rows) {
    std::cout << "N=" << row.n << " K=" << row.k << " rmse_mean=" << row.rmse_mean
              << " rmse_std=" << row.rmse_std << '\n';
  }
  std::cout << "slope " << report.slope << " +- " << report.slope_stderr << '\n';
  return 0;
}

int cmd_validate(const Flags& f, bool tamper) {
  sdebp::ValidationOptions vo;
  vo.quick = f.quick;
  vo.seed = f.seed;
  if (tamper) vo.law = sdebp::IncrementLaw::tampered();
  const auto results = sdebp::run_validation(vo);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    if (!r.passed) ++failed;
  }
  if (failed) {
    std::cerr << failed << " check(s) failed:";
    for (const auto& r : results) {
      if (!r.passed) std::cerr << "\n  " << r.name;
    }
    std::cerr << '\n';
    return 1;
  }
  return 0;
}

void add_shared(CLI::App* app, Flags& f) {
  app->add_option("--benchmark", f.benchmark)->check(CLI::IsMember({"example1", "example2"}));
  app->add_option("--N", f.n)->check(CLI::PositiveNumber);
  app->add_option("--K", f.k)->check(CLI::NonNegativeNumber);
  app->add_option("--c-iter", f.c_iter)->check(CLI::PositiveNumber);
  app->add_option("--N-list", f.n_list)->delimiter(',');
  app->add_option("--runs", f.runs);
  app->add_option("--sigma", f.sigma)->check(CLI::NonNegativeNumber);
  app->add_option("--x0", f.x0);
  app->add_option("--theta", f.theta)->check(CLI::PositiveNumber);
  app->add_option("--M", f.m);
  app->add_option("--scheme", f.scheme)->check(CLI::IsMember({"high-order", "euler"}));
  app->add_option("--driver", f.driver)->check(CLI::IsMember({"restricted", "general"}));
  app->add_option("--seed", f.seed);
  app->add_option("--out", f.out);
  app->add_flag("--paper-scale", f.paper_scale);
  app->add_flag("--quick", f.quick);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-wise backpropagation for stochastic optimal control"};
  app.require_subcommand(1);
  Flags flags;
  bool tamper = false;
  auto* train = app.add_subcommand("train", "train one control and write control.csv");
  auto* converge = app.add_subcommand("converge", "RMSE convergence study, writes converge.csv");
  auto* validate = app.add_subcommand("validate", "oracle checks; exit status reflects the result");
  for (auto* sub : {train, converge, validate}) add_shared(sub, flags);
  validate->add_flag("--tamper-sampler", tamper, "swap the increment coefficients (test hook)")
      ->group("");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(flags);
    if (*converge) return cmd_converge(flags);
    return cmd_validate(flags, tamper);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
