#include "hyckn/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hyckn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hyckn_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

cli::RunConfig config(const std::string& cmd, const fs::path& out) {
  cli::RunConfig c;
  c.command = cmd;
  c.out = out.string();
  return c;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(HYCKN_BIN) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, RangeParsing) {
  const auto r = cli::Range::parse("0:1:5");
  ASSERT_EQ(r.values().size(), 5u);
  EXPECT_DOUBLE_EQ(r.values()[2], 0.5);
  EXPECT_DOUBLE_EQ(r.values().back(), 1.0);
  EXPECT_THROW(cli::Range::parse("0:1"), std::invalid_argument);
  EXPECT_THROW(cli::Range::parse("0:1:0"), std::invalid_argument);
  EXPECT_THROW(cli::Range::parse("0:1:3x"), std::invalid_argument);
}

TEST(Cli, ConstantHardyFloor) {
  const fs::path out = scratch("const01");
  auto c = config("constant", out);
  c.params.b = 1.0;
  std::ostringstream log;
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  const auto j = nlohmann::json::parse(slurp(out / "constant.json"));
  EXPECT_DOUBLE_EQ(j["hardy_floor"].get<double>(), 0.25);
  EXPECT_LE(j["estimate"].get<double>(), 0.25 * 1.02);
  EXPECT_GE(j["estimate"].get<double>(), 0.25);
  EXPECT_TRUE(fs::exists(out / "constant_profile.csv"));
  EXPECT_EQ(slurp(out / "constant_profile.csv").rfind("# schema=1\nt,u\n", 0), 0u);
}

TEST(Cli, ConstantValidation) {
  const fs::path out = scratch("const02");
  auto c = config("constant", out);
  c.params.b = 2.0;
  std::ostringstream log;
  EXPECT_EQ(cli::run(c, log), cli::kValidation);
  const auto j = nlohmann::json::parse(slurp(out / "violations.json"));
  EXPECT_EQ(j["violations"][0]["constraint"], "b-a<=1");
  EXPECT_NE(log.str().find("b-a<=1"), std::string::npos);
}

TEST(Cli, SolveArtifactsAndDeterminism) {
  const fs::path o1 = scratch("solve1"), o2 = scratch("solve2");
  std::ostringstream log;
  auto c = config("solve", o1);
  c.formats = {"csv", "json", "svg"};
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  c.out = o2.string();
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  for (const char* f : {"solve.json", "solution.csv", "solve_history.csv"})
    EXPECT_EQ(slurp(o1 / f), slurp(o2 / f)) << f;
  EXPECT_NE(slurp(o1 / "solution.svg").find("<polyline"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(o1 / "solve.json"));
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_LT(j["residual"].get<double>(), 1e-6);
}

TEST(Cli, SolveValidationAndNonConvergence) {
  std::ostringstream log;
  auto c = config("solve", scratch("solve3"));
  c.params.q = 6.5;
  EXPECT_EQ(cli::run(c, log), cli::kValidation);
  c.params.q = 4.0;
  c.tmax = 3.0;  // solution does not decay inside the grid
  EXPECT_EQ(cli::run(c, log), cli::kNonConvergence);
  c.tmax.reset();
  c.max_iter = 2;
  EXPECT_EQ(cli::run(c, log), cli::kNonConvergence);
}

TEST(Cli, VerifySubsetAndFault) {
  std::ostringstream log;
  const fs::path out = scratch("verify");
  auto c = config("verify", out);
  c.checks = {"hardy"};
  EXPECT_EQ(cli::run(c, log), cli::kOk);
  const std::string csv = slurp(out / "verify.csv");
  EXPECT_NE(csv.find("check,worst_violation,tolerance,pass"), std::string::npos);
  EXPECT_NE(csv.find("hardy.alpha=0"), std::string::npos);
  EXPECT_EQ(csv.find("geometry"), std::string::npos);

  c.checks = {"quadrature"};
  c.inject_fault = "3:1.01";
  EXPECT_EQ(cli::run(c, log), cli::kVerification);
  EXPECT_NE(slurp(out / "verify.csv").find("false"), std::string::npos);

  c.checks = {"nonsense"};
  c.inject_fault.clear();
  EXPECT_EQ(cli::run(c, log), cli::kValidation);
}

TEST(Cli, PohozaevModes) {
  std::ostringstream log;
  const fs::path out = scratch("poho");
  auto c = config("pohozaev", out);
  c.params.p = 4.0;
  c.formats = {"csv", "json", "svg"};
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  auto j = nlohmann::json::parse(slurp(out / "pohozaev.json"));
  EXPECT_EQ(j["mode"], "identity");
  EXPECT_LT(j["residual"].get<double>(), 1e-2);
  EXPECT_NE(slurp(out / "pohozaev_scan.csv").find("r,bracket2,laplacian_factor"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "pohozaev_bracket2.svg"));

  c.params.p = 7.0;
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  j = nlohmann::json::parse(slurp(out / "pohozaev.json"));
  EXPECT_EQ(j["mode"], "probe");
  EXPECT_TRUE(j["tail_decreasing"].get<bool>());

  std::ostringstream warn;
  c.params.alpha = 5.0;
  c.params.beta = 3.0;
  ASSERT_EQ(cli::run(c, warn), cli::kOk);
  EXPECT_NE(warn.str().find("warning: N<alpha-1"), std::string::npos);
  j = nlohmann::json::parse(slurp(out / "pohozaev.json"));
  EXPECT_FALSE(j["factor_hypotheses_ok"].get<bool>());
}

TEST(Cli, SweepRowsResumeAndMatchSingleRun) {
  std::ostringstream log;
  const fs::path out = scratch("sweep");
  auto c = config("sweep", out);
  c.a_range = cli::Range::parse("0:0.4:5");
  c.b_range = cli::Range::parse("0.4:1:5");
  c.jobs = 4;
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  const std::string first = slurp(out / "sweep.csv");
  std::istringstream is(first);
  std::string line;
  int rows = 0;
  std::string row01;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
    ++rows;
    if (line.rfind("0,1,", 0) == 0) row01 = line;
  }
  EXPECT_EQ(rows, 25);

  // single run at (0,1) reproduces the sweep cell
  const fs::path single = scratch("sweep_single");
  auto s = config("constant", single);
  s.params.b = 1.0;
  ASSERT_EQ(cli::run(s, log), cli::kOk);
  const auto j = nlohmann::json::parse(slurp(single / "constant.json"));
  EXPECT_NE(row01.find("," + format_double(j["hardy_estimate"].get<double>()) + ","), std::string::npos);
  EXPECT_NE(row01.find("," + format_double(j["estimate"].get<double>()) + ","), std::string::npos);

  // drop two markers, rerun with one job: same bytes, two cells recomputed
  fs::remove(out / "cells" / "cell_00003.done");
  fs::remove(out / "cells" / "cell_00017.done");
  c.jobs = 1;
  std::ostringstream relog;
  ASSERT_EQ(cli::run(c, relog), cli::kOk);
  EXPECT_NE(relog.str().find("25 cells, 2 computed"), std::string::npos);
  EXPECT_EQ(slurp(out / "sweep.csv"), first);
}

TEST(Cli, SweepRecordsBadCells) {
  std::ostringstream log;
  const fs::path out = scratch("sweep_bad");
  auto c = config("sweep", out);
  c.q_range = cli::Range::parse("3:7:3");
  ASSERT_EQ(cli::run(c, log), cli::kOk);
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_NE(csv.find("invalid:q<2_alpha^beta"), std::string::npos);
  EXPECT_NE(csv.find(",ok,"), std::string::npos);
}

TEST(CliBinary, ExitCodesAndConfigPrecedence) {
  const fs::path out = scratch("bin");
  EXPECT_EQ(run_binary("constant --N 3 --a 0 --b 2 --out " + out.string()), 2);
  EXPECT_EQ(run_binary("solve --q 4 --out " + out.string()), 0);
  EXPECT_EQ(run_binary("verify --checks geometry --inject-fault 0:2 --out " + out.string()), 0);
  EXPECT_EQ(run_binary("verify --checks quadrature --inject-fault 3:1.01 --out " + out.string()), 4);
  EXPECT_EQ(run_binary("bogus"), 2);

  fs::create_directories(out);
  std::ofstream(out / "run.cfg") << "# invalid on its own\nN = 3\na = 0\nb = 2\nout = " << out.string() << "\n";
  EXPECT_EQ(run_binary("constant --config " + (out / "run.cfg").string()), 2);
  EXPECT_EQ(run_binary("constant --config " + (out / "run.cfg").string() + " --b 1"), 0);
  const auto j = nlohmann::json::parse(slurp(out / "constant.json"));
  EXPECT_EQ(j["b"].get<double>(), 1.0);
}
