#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "sdebp/report.hpp"
#include "sdebp/validate.hpp"

namespace sdebp {
namespace {

TEST(Format, SeventeenDigitsRoundTrip) {
  const double v = 0.1 + 0.2;
  const std::string s = format_double(v);
  EXPECT_EQ(s, "0.30000000000000004");
  EXPECT_EQ(std::strtod(s.c_str(), nullptr), v);
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::strtod(format_double(-2.5e-10).c_str(), nullptr), -2.5e-10);
  EXPECT_EQ(format_double(0.125), "0.125");
}

TEST(Manifest, OverwritesAndKeepsOrder) {
  RunManifest m;
  m.set("a", "1");
  m.set("b", "2");
  m.set("a", "3");
  std::ostringstream os;
  m.write(os);
  EXPECT_EQ(os.str(), "# a: 3\n# b: 2\n");
  ASSERT_NE(m.find("b"), nullptr);
  EXPECT_EQ(m.find("c"), nullptr);
}

TEST(ControlCsv, ColumnsAndRows) {
  const Benchmark b = example2_problem(0.1, 1.0);
  const TimeGrid grid(1.0, 4);
  RunManifest m;
  m.set("subcommand", "train");
  std::ostringstream os;
  write_control_csv(os, m, grid, ControlPath(4, Vector::Zero(2)), b.exact_control);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# subcommand: train");
  std::getline(in, line);
  EXPECT_EQ(line, "t,u_num_1,u_num_2,u_exact_1,u_exact_2");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0,0,0,1,", 0), 0u);
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(ControlCsv, ExactColumnsOptional) {
  const TimeGrid grid(1.0, 2);
  std::ostringstream os;
  write_control_csv(os, {}, grid, ControlPath(2, Vector::Zero(1)), nullptr);
  EXPECT_EQ(os.str(), "t,u_num_1\n0,0\n0.5,0\n1,0\n");
}

TEST(ConvergeCsv, HeaderRowsAndFooter) {
  const ConvergenceReport r = summarize_study({10, 20}, {200, 1600}, {{0.125, 0.125}, {0.0625, 0.0625}});
  std::ostringstream os;
  write_converge_csv(os, {}, r);
  const std::string text = os.str();
  const std::string rows =
      "N,K,runs,rmse_mean,rmse_std\n"
      "10,200,2,0.125,0\n"
      "20,1600,2,0.0625,0\n";
  ASSERT_EQ(text.substr(0, rows.size()), rows);
  const std::string footer = text.substr(rows.size());
  ASSERT_EQ(footer.rfind("slope,", 0), 0u);
  EXPECT_NEAR(std::strtod(footer.c_str() + 6, nullptr), -1.0, 1e-12);
  EXPECT_NE(footer.find(",slope_stderr,"), std::string::npos);
  EXPECT_EQ(footer.back(), '\n');
}

TEST(DataRows, SkipsManifest) {
  const auto path = std::filesystem::temp_directory_path() / "sdebp_data_rows.csv";
  write_file(path.string(), "# a: 1\nx,y\n1,2\n");
  const auto rows = data_rows(path.string());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "x,y");
  std::filesystem::remove(path);
  EXPECT_THROW(data_rows(path.string()), Error);
}

TEST(Validation, QuickRunPasses) {
  ValidationOptions opt;
  opt.quick = true;
  for (const auto& r : run_validation(opt)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Validation, TamperedSamplerFailsIncrementCheck) {
  ValidationOptions opt;
  opt.quick = true;
  opt.law = IncrementLaw::tampered();
  int increment_failures = 0;
  for (const auto& r : run_validation(opt)) {
    if (r.name.rfind("increment law", 0) == 0 && !r.passed) ++increment_failures;
  }
  EXPECT_EQ(increment_failures, 3);
}

TEST(Validation, ProjectionTrials) {
  const RandomBoxTrial t = projection_trials(5000, 1);
  EXPECT_LE(t.nonexpansive_excess, 1e-12);
  EXPECT_LE(t.variational_excess, 1e-12);
}

}  // namespace
}  // namespace sdebp
