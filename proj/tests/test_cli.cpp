#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srb/cli.hpp"

using namespace srb;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "srb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, WeakConvergenceWritesSchema) {
  const std::string path = temp("srb_cli_w.csv");
  const auto r = run({"weak-convergence", "--paths", "50", "--seed", "42", "--steps", "2,4,8", "--reference-steps", "32",
                      "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path);
  EXPECT_NE(csv.find("\nmethod,h,n_steps,paths,err_norm,err_m1,err_m2,err_m3\n"), std::string::npos);
  EXPECT_NE(csv.find("# seed = 42\n"), std::string::npos);
  EXPECT_NE(csv.find("# paths = 50\n"), std::string::npos);
  EXPECT_NE(csv.find("\nEM,0.5,2,50,"), std::string::npos);
  EXPECT_NE(r.out.find("slope"), std::string::npos);
  std::remove(path.c_str());
}

TEST(Cli, FlagsOverrideConfigFile) {
  const std::string cfg = temp("srb_cli.cfg"), out = temp("srb_cli_e.csv");
  {
    std::ofstream f(cfg);
    f << "experiment = energy_drift\ninertia = 0.9144, 1.098, 1.66\nm0 = 0.4165, 0.9072, 0.0577\nhorizon = 10\n"
         "steps = 40\npaths = 5\nseed = 3\n";
  }
  const auto r = run({"energy-drift", "--config", cfg, "--seed", "9", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  EXPECT_NE(csv.find("# seed = 9\n"), std::string::npos);
  EXPECT_NE(csv.find("# horizon = 10\n"), std::string::npos);
  EXPECT_NE(csv.find("\nmethod,t,energy_error,casimir_error\n"), std::string::npos);
  EXPECT_TRUE(config_from_csv(csv).same_experiment([&] {
    auto c = load_config(cfg);
    c.seed = 9;
    return c;
  }()));
  std::remove(cfg.c_str());
  std::remove(out.c_str());
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  const auto r = run({"weak-convergence", "--nope"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, ConfigErrorsNameTheKey) {
  auto r = run({"weak-convergence", "--paths", "zero"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'paths'"), std::string::npos) << r.err;
  r = run({"weak-convergence", "--methods", "EM,RK4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'methods'"), std::string::npos) << r.err;

  const std::string cfg = temp("srb_cli_bad.cfg");
  {
    std::ofstream f(cfg);
    f << "experiment = weak_convergence\ninertia = 1, 2, 3\nm0 = 1, 0, 0\nhorizon = 1\nspeed = 3\n";
  }
  r = run({"weak-convergence", "--config", cfg});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'speed'"), std::string::npos);
  EXPECT_NE(r.err.find("line 5"), std::string::npos);
  r = run({"trajectory", "--config", cfg});
  EXPECT_EQ(r.code, 1);
  std::remove(cfg.c_str());
}

TEST(Cli, NumericalFailureExitsTwoWithCoordinate) {
  const std::string out = temp("srb_cli_t.csv");
  const auto r = run({"trajectory", "--methods", "EM", "--out", out});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("method=EM"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("h=0.1"), std::string::npos);
  EXPECT_NE(r.err.find("path=0"), std::string::npos);
  EXPECT_NE(r.err.find("step="), std::string::npos);
  std::remove(out.c_str());
}

TEST(Cli, FrbCheckPrintsDeviation) {
  const auto r = run({"frb-check", "--cases", "10"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("max |exact - oracle|"), std::string::npos);
}

TEST(Cli, SelftestPasses) {
  const auto r = run({"selftest"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, BinaryExitCodes) {
  const std::string bin = SRB_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " selftest > /dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((bin + " no-such-command > /dev/null 2>&1").c_str())), 1);
}
