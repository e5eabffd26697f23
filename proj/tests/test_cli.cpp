#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + HOPFLAB_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json results(const fs::path& dir) { return json::parse(slurp(dir / "results.json")); }

fs::path fresh(const std::string& name) {
  const fs::path p = fs::path("cli_out") / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, VerifyGeometryPasses) {
  const fs::path o = fresh("geom");
  ASSERT_EQ(run("verify-geometry --out " + o.string()), 0);
  const json r = results(o);
  EXPECT_EQ(r["command"], "verify-geometry");
  EXPECT_TRUE(r["result"]["all_pass"].get<bool>());
  for (const auto& c : r["result"]["checks"]) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_EQ(c["status"], "pass") << c["name"];
    EXPECT_LE(c["residual"].get<double>(), c["threshold"].get<double>());
  }
  EXPECT_TRUE(fs::exists(o / "manifest.json"));
  const json m = json::parse(slurp(o / "manifest.json"));
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_TRUE(m.contains("wall_time_s"));
  EXPECT_EQ(m["config"]["grid"], "16x16");
}

TEST(Cli, CoarseGridSkipsHighDegreeChecks) {
  const fs::path o = fresh("coarse");
  ASSERT_EQ(run("verify-geometry --grid 16x4 --out " + o.string()), 0);
  const json r = results(o);
  int skipped = 0;
  for (const auto& c : r["result"]["checks"]) skipped += c["status"] == "skipped-below-resolution";
  EXPECT_GT(skipped, 0);
}

TEST(Cli, ParseAndConfigErrorsExitTwo) {
  EXPECT_EQ(run("verify-geometry --no-such-flag"), 2);
  EXPECT_EQ(run("verify-geometry --grid 16by16"), 2);
  EXPECT_EQ(run("verify-geometry --grid 16x15"), 2);
  EXPECT_EQ(run("energy --rho -1"), 2);
  EXPECT_EQ(run(""), 2);
  fs::create_directories("cli_out");
  std::ofstream("cli_out/bad.toml") << "grid = \"16x16\"\nthis line is not a key value pair\n";
  EXPECT_EQ(run("verify-geometry --config cli_out/bad.toml"), 2);
  std::ofstream("cli_out/extra.toml") << "unknown_key = 3\n";
  EXPECT_EQ(run("verify-geometry --config cli_out/extra.toml"), 2);
}

TEST(Cli, ConfigFileReadAndFlagsWin) {
  fs::create_directories("cli_out");
  std::ofstream("cli_out/good.toml") << "grid = \"8x8\"\ntrunc = 2\n";
  const fs::path o = fresh("cfg");
  ASSERT_EQ(run("invariant --config cli_out/good.toml --trunc 3 --out " + o.string()), 0);
  const json r = results(o);
  EXPECT_EQ(r["trunc"], 3);
  EXPECT_EQ(json::parse(slurp(o / "manifest.json"))["config"]["grid"], "8x8");
}

TEST(Cli, UnknownMapIsRuntimeError) { EXPECT_EQ(run("invariant --map no-such-map --out " + fresh("bad").string()), 3); }

TEST(Cli, InvariantValues) {
  const fs::path a = fresh("inv_h"), b = fresh("inv_c");
  ASSERT_EQ(run("invariant --map hopf --out " + a.string()), 0);
  EXPECT_NEAR(results(a)["result"]["q_raw"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(results(a)["result"]["q_rounded"], 1);
  ASSERT_EQ(run("invariant --map constant --out " + b.string()), 0);
  EXPECT_EQ(results(b)["result"]["q_raw"].get<double>(), 0.0);
  EXPECT_TRUE(results(b)["result"]["zero_pullback"].get<bool>());
}

TEST(Cli, EnergyOfHopf) {
  const fs::path o = fresh("energy");
  ASSERT_EQ(run("energy --map hopf --rho 1 --out " + o.string()), 0);
  EXPECT_NEAR(results(o)["result"]["reports"][0]["total"].get<double>(), 48 * kPi * kPi, 1e-8);
}

TEST(Cli, CoercivityHasNoViolations) {
  const fs::path o = fresh("coer");
  ASSERT_EQ(run("coercivity --rho 0.5 --eps 0.1 --samples 20 --out " + o.string()), 0);
  EXPECT_TRUE(fs::exists(o / "coercivity.csv"));
  EXPECT_EQ(results(o)["result"]["reports"][0]["violations"], 0);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  for (const std::string args : {"gap --samples 20 --seed 5", "flow --rho 0.5 --max-iter 10 --seed 3"}) {
    const fs::path a = fresh("rep_a"), b = fresh("rep_b");
    ASSERT_NE(run(args + " --out " + a.string()), 2) << args;
    ASSERT_NE(run(args + " --out " + b.string()), 2) << args;
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      const std::string name = e.path().filename().string();
      if (name == "manifest.json") continue;  // carries wall time
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(b / name)) << args << ": " << name;
    }
    EXPECT_GE(files, 2) << args;
  }
}
