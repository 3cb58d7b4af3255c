#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "sdebp/report.hpp"

namespace sdebp {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sdebp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(SDEBP_CLI) + " " + args + " --out " + dir_.string() + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::vector<std::string> rows(const std::string& file) const { return data_rows((dir_ / file).string()); }

  fs::path dir_;
};

TEST_F(Cli, TrainWritesOneRowPerNode) {
  ASSERT_EQ(run("train --benchmark example1 --N 50 --K 25000 --sigma 0.5 --seed 7"), 0);
  const auto r = rows("control.csv");
  ASSERT_EQ(r.size(), 52u);
  EXPECT_EQ(r[0], "t,u_num_1,u_num_2,u_exact_1,u_exact_2");
}

TEST_F(Cli, ZeroIterationsWritesInitialControl) {
  ASSERT_EQ(run("train --benchmark example1 --N 10 --K 0"), 0);
  const auto r = rows("control.csv");
  for (std::size_t i = 1; i < r.size(); ++i) {
    std::istringstream in(r[i]);
    std::string t, u1, u2;
    std::getline(in, t, ',');
    std::getline(in, u1, ',');
    std::getline(in, u2, ',');
    EXPECT_EQ(u1, "0");
    EXPECT_EQ(u2, "0");
  }
}

TEST_F(Cli, Example2ExactControlAtZero) {
  ASSERT_EQ(run("train --benchmark example2 --N 50 --K 10 --sigma 0.1"), 0);
  const auto r = rows("control.csv");
  std::istringstream in(r[1]);
  std::vector<std::string> fields;
  for (std::string f; std::getline(in, f, ',');) fields.push_back(f);
  ASSERT_EQ(fields.size(), 5u);
  EXPECT_EQ(fields[0], "0");
  EXPECT_EQ(fields[3], "1");
}

TEST_F(Cli, ManifestReproducesRows) {
  ASSERT_EQ(run("converge --benchmark example1 --N-list 4,6,8 --runs 2 --seed 5"), 0);
  const auto first = rows("converge.csv");
  ASSERT_EQ(first.size(), 5u);
  EXPECT_EQ(first[0], "N,K,runs,rmse_mean,rmse_std");
  EXPECT_EQ(first[4].rfind("slope,", 0), 0u);
  ASSERT_EQ(run("converge --benchmark example1 --N-list 4,6,8 --runs 2 --seed 5"), 0);
  EXPECT_EQ(rows("converge.csv"), first);
  EXPECT_TRUE(fs::exists(dir_ / "converge_runs.csv"));
}

TEST_F(Cli, SingleRunIsRejected) {
  EXPECT_NE(run("converge --benchmark example1 --runs 1"), 0);
}

TEST_F(Cli, UnknownBenchmarkIsRejected) {
  EXPECT_NE(run("train --benchmark example9"), 0);
}

TEST_F(Cli, TamperedValidationFails) {
  EXPECT_NE(run("validate --quick --tamper-sampler"), 0);
  std::ifstream err(dir_ / "stderr.txt");
  std::stringstream ss;
  ss << err.rdbuf();
  EXPECT_NE(ss.str().find("increment law"), std::string::npos);
}

TEST_F(Cli, QuickValidationPasses) {
  EXPECT_EQ(run("validate --quick"), 0);
}

}  // namespace
}  // namespace sdebp
