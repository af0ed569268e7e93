#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "curvkit/cli.hpp"
#include "json.hpp"

using curvkit::cli::run;
using nlohmann::json;

namespace {

struct Output {
  int code;
  std::string out;
  std::string err;
};

Output invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, VertexCurvatureOfCube) {
  const Output o = invoke({"curv-vertex", "--gen", "hypercube:3"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_EQ(j["schema"], "curvkit-report/1");
  EXPECT_NEAR(j["results"]["K_global"].get<double>(), 2.0 / 3.0, 1e-10);
  EXPECT_EQ(j["results"]["vertices"].size(), 8u);
}

TEST(Cli, VerifySmallCubeHasNoViolations) {
  const Output o = invoke({"verify", "--gen", "hypercube:2", "--trials", "20", "--starts", "4"});
  ASSERT_EQ(o.code, 0) << o.err;
  for (const auto& r : json::parse(o.out)["results"]["reports"]) EXPECT_NE(r["verdict"], "violated") << r["name"];
}

TEST(Cli, DomainErrorExitsTwo) {
  const Output o =
      invoke({"curv-measure", "--gen", "cycle:4", "--mean", "logarithmic", "--rho", R"({"0": 1, "1": 0, "2": 1, "3": 1})"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("invalid input"), std::string::npos);
}

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"curv-vertex"}).code, 2);
  EXPECT_EQ(invoke({"curv-vertex", "--gen", "cycle:2"}).code, 2);
  EXPECT_EQ(invoke({"heat", "--gen", "cycle:5", "--t", "-1", "--x", "0", "--y", "1"}).code, 2);
}

TEST(Cli, Deterministic) {
  const std::vector<std::string> args = {"curv-entropic", "--gen", "cycle:5", "--starts", "3", "--seed", "9"};
  const Output a = invoke(args), b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedFromEnvironment) {
  ::setenv("CURVKIT_SEED", "123", 1);
  const Output o = invoke({"curv-vertex", "--gen", "cycle:5", "--seed", "1"});
  ::unsetenv("CURVKIT_SEED");
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(json::parse(o.out)["config"]["seed"], 123);
}

TEST(Cli, ConfigRoundTrip) {
  curvkit::cli::RunConfig c;
  c.command = "verify";
  c.generator = "cycle:6";
  c.n = 4.0;
  c.t_grid = {0.5, 2.0};
  c.profile = {2.0, std::numeric_limits<double>::infinity()};
  c.seed = 77;
  const json j = curvkit::cli::to_json(c);
  const curvkit::cli::RunConfig d = curvkit::cli::config_from_json(j);
  EXPECT_EQ(curvkit::cli::to_json(d), j);
  EXPECT_EQ(j["profile"][1], "inf");
}

TEST(Cli, InfiniteValuesAsStrings) {
  const Output o = invoke({"curv-measure", "--gen", "cycle:5", "--rho", "dirac:0", "--profile", "1,2,inf"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_EQ(j["config"]["n"], "inf");
  EXPECT_EQ(j["results"]["profile"]["points"].size(), 3u);
}
