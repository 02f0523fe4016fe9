#include "t2inv/builtin.hpp"
#include "t2inv/io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace t2inv;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("t2inv_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// runs the CLI with --out <dir>; stderr goes to dir/stderr.txt
int run(const std::string& args, const fs::path& out, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" T2INV_CLI_PATH "\" " + args + " --out \"" +
                          out.string() + "\" > \"" + (out / "stdout.txt").string() + "\" 2> \"" +
                          (out / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json report(const fs::path& dir, const std::string& command) {
  return json::parse(slurp(dir / (command + ".json")));
}

}  // namespace

TEST(Cli, EinsteinCheckRoundS4) {
  const fs::path out = scratch("einstein");
  ASSERT_EQ(run("einstein-check --builtin round_s4 --n 257 --lambda 3", out), 0);
  const json r = report(out, "einstein-check");
  EXPECT_EQ(r["command"], "einstein-check");
  EXPECT_EQ(r["result"]["verdict"], "pass");
  EXPECT_LE(r["result"]["residual"].get<double>(), 1e-3);
  EXPECT_EQ(r["config"]["n"], 257);
  EXPECT_TRUE(r.contains("version"));
}

TEST(Cli, EinsteinCheckFailsOnWrongConstant) {
  const fs::path out = scratch("einstein_fail");
  EXPECT_EQ(run("einstein-check --builtin round_s4 --n 33 --lambda 2", out), 2);
  EXPECT_EQ(report(out, "einstein-check")["result"]["verdict"], "fail");
}

TEST(Cli, ClassifySquare) {
  const fs::path out = scratch("classify");
  ASSERT_EQ(run("classify-square --p 0,1,2,3 --n 129", out), 0);
  const json t = report(out, "classify-square")["result"]["table"];
  ASSERT_EQ(t.size(), 4u);
  for (const json& row : t) {
    EXPECT_EQ(row["einstein"].get<bool>(), row["p"].get<int>() == 0) << row.dump();
    EXPECT_TRUE(row["solutions_found"].get<bool>());
  }
  EXPECT_TRUE(fs::exists(out / "classification.csv"));
}

TEST(Cli, ValidateActionRejectsBadDeterminant) {
  const fs::path out = scratch("action");
  EXPECT_EQ(run("validate-action --edges \"(1,0),(3,2)\"", out), 2);
  const json r = report(out, "validate-action")["result"];
  EXPECT_FALSE(r["admissible"].get<bool>());
  EXPECT_FALSE(slurp(out / "stderr.txt").empty());
  EXPECT_EQ(run("validate-action --edges \"(1,0),(0,1),(1,0),(2,1)\"", out), 0);
}

TEST(Cli, ReportsAreByteIdentical) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string args = "nic-check --samples 500 --seed 3";
  ASSERT_EQ(run(args, a), 0);
  ASSERT_EQ(run(args, b), 0);
  EXPECT_EQ(slurp(a / "nic-check.json"), slurp(b / "nic-check.json"));
  ASSERT_EQ(run("curvature --builtin product_spheres --n 17", a), 0);
  ASSERT_EQ(run("curvature --builtin product_spheres --n 17", b), 0);
  EXPECT_EQ(slurp(a / "curvature.json"), slurp(b / "curvature.json"));
}

TEST(Cli, OutputDirectoryOverride) {
  const fs::path out = scratch("env_out"), env = scratch("env_dir");
  ASSERT_EQ(run("edge-ode --sec 0 --lambda 1", out, "T2INV_OUTPUT_DIR=\"" + env.string() + "\""), 0);
  EXPECT_TRUE(fs::exists(env / "edge-ode.json"));
  EXPECT_FALSE(fs::exists(out / "edge-ode.json"));
}

TEST(Cli, MalformedManifestIsAnError) {
  const fs::path out = scratch("bad_manifest");
  {
    std::ofstream f(out / "manifest.json");
    f << "{ \"topology\": \"rectangle\", ";
  }
  EXPECT_EQ(run("curvature --manifest \"" + (out / "manifest.json").string() + "\"", out), 1);
  EXPECT_FALSE(slurp(out / "stderr.txt").empty());
  EXPECT_EQ(run("curvature --manifest \"" + (out / "missing.json").string() + "\"", out), 1);
  EXPECT_EQ(run("einstein-check --n 2 --builtin round_s4", out), 1);
}

TEST(Cli, ManifestRoundTrip) {
  const fs::path out = scratch("manifest");
  const fs::path m = save_metric(out / "data", sample(round_s4_model(), 65));
  EXPECT_EQ(run("einstein-check --lambda 3 --manifest \"" + m.string() + "\"", out), 0);
}

TEST(Cli, SmoothnessCheckVerdicts) {
  const fs::path out = scratch("smooth");
  EXPECT_EQ(run("smoothness-check --builtin round_s4", out), 0);
  EXPECT_EQ(run("smoothness-check --builtin \"square_family(2)\"", out), 2);
  EXPECT_TRUE(report(out, "smoothness-check")["result"].dump().find("a2_leading_coefficient") != std::string::npos);
}

TEST(Cli, EigenAndFlowRun) {
  const fs::path out = scratch("eigen_flow");
  EXPECT_EQ(run("eigen --builtin product_spheres --n 33", out), 0);
  EXPECT_EQ(run("flow --builtin \"perturbed(product_spheres,0,0.01)\" --n 16 --T 0.01 --dt 1e-3", out), 0);
  const json r = report(out, "flow")["result"];
  EXPECT_TRUE(r.dump().find("polarity") != std::string::npos);
}
