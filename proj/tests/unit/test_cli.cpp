#include <filesystem>
#include <fstream>
#include <sstream>

#include "capassign/cli.hpp"
#include "test_util.hpp"

using namespace capassign;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "capassign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("capassign_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text) {
    fs::create_directories(dir_.parent_path());
    const fs::path p = dir_.string() + ".json";
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesParseableArtifacts) {
  const auto r = invoke({"run", "--world", "double-integrator", "--n", "5", "--seed", "7",
                         "--policy", "both", "--output-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"trace_dyn.csv", "trace_emd.csv", "trace_dyn.json", "trace_emd.json",
                        "cumulative_cost.csv", "summary.json", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const Json summary = Json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["status"], "ok");
  EXPECT_EQ(summary["seed"], 7);
  EXPECT_TRUE(summary["results"].contains("dyn"));
  EXPECT_NEAR(summary["results"]["dyn"]["normalized_cost"].get<double>(), 1.0, 0.02);
  const Json sidecar = Json::parse(slurp(dir_ / "trace_emd.json"));
  EXPECT_EQ(sidecar["config"]["n"], 5);
  EXPECT_EQ(sidecar["assignment_solves"].get<int>(), summary["results"]["emd"]["assignment_solves"].get<int>());

  std::istringstream csv(slurp(dir_ / "trace_dyn.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("time,agent_id,position_0", 0), 0u);
  EXPECT_NE(header.find("assigned_target,active_flag"), std::string::npos);
}

TEST_F(CliTest, DefaultedFieldsAreListed) {
  const auto r = invoke({"run", "--n", "1", "--output-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json summary = Json::parse(slurp(dir_ / "summary.json"));
  const auto fields = summary["defaulted_fields"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(fields.begin(), fields.end(), "engagement.capture_radius"), fields.end());
  EXPECT_EQ(std::find(fields.begin(), fields.end(), "n"), fields.end());
}

TEST_F(CliTest, MissingConfigFileIsConfigErrorWithoutArtifacts) {
  const auto r = invoke({"run", "--config", "/nonexistent/cfg.json", "--output-dir", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, UnknownFieldIsNamed) {
  const fs::path cfg = write_config(R"({"engagement": {"capture_radiuss": 2}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--output-dir", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("engagement.capture_radiuss"), std::string::npos) << r.err;
  fs::remove(cfg);
}

TEST_F(CliTest, BadValueIsNamed) {
  const auto r = invoke({"run", "--capture-radius", "-2", "--output-dir", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("engagement.capture_radius"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, FlagsOverrideFileOverrideDefaults) {
  const fs::path cfg = write_config(R"({"n": 3, "seed": 9, "engagement": {"horizon": 4.0}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--seed", "12", "--policy", "dyn",
                         "--output-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json echo = Json::parse(slurp(dir_ / "config.json"));
  EXPECT_EQ(echo["n"], 3);
  EXPECT_EQ(echo["seed"], 12);
  EXPECT_EQ(echo["engagement"]["horizon"], 4.0);
  EXPECT_EQ(echo["engagement"]["capture_radius"], 1.0);
  EXPECT_FALSE(fs::exists(dir_ / "trace_emd.csv"));
  fs::remove(cfg);
}

TEST_F(CliTest, RuntimeFailureExitsTwoWithReason) {
  const fs::path cfg = write_config(R"({"engagement": {"integrator": {"max_step": 1e-30}}})");
  const auto r = invoke({"run", "--config", cfg.string(), "--n", "2", "--output-dir", dir_.string()});
  EXPECT_EQ(r.code, 2);
  const Json summary = Json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["status"], "error");
  EXPECT_FALSE(summary["error"].get<std::string>().empty());
  fs::remove(cfg);
}

TEST_F(CliTest, MinimalSweep) {
  const auto r = invoke({"sweep", "--sizes", "2", "--runs", "3", "--output-dir", dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"report_n2.json", "report_n2.csv", "histogram_n2.csv",
                        "sweep_summary.json", "sweep_summary.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const Json report = Json::parse(slurp(dir_ / "report_n2.json"));
  EXPECT_EQ(report["runs"].size(), 3u);
  EXPECT_FALSE(report["runs"][0].contains("runtime_dyn_s"));
}

TEST_F(CliTest, SweepRejectsZeroRuns) {
  const auto r = invoke({"sweep", "--sizes", "2", "--runs", "0", "--output-dir", dir_.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("sweep.runs"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_));
}

TEST_F(CliTest, VerifyPassesAndReportsJson) {
  const auto r = invoke({"verify", "--json"});
  EXPECT_EQ(r.code, 0) << r.out;
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_GE(j["oracles"].size(), 6u);
}

TEST_F(CliTest, InjectedFaultExitsThreeNamingOracle) {
  const auto r = invoke({"verify", "--inject-fault", "care_random"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("care_random"), std::string::npos);
  EXPECT_EQ(invoke({"verify", "--inject-fault", "nope"}).code, 1);
}

TEST_F(CliTest, UnknownVerbIsConfigError) {
  EXPECT_EQ(invoke({"launch"}).code, 1);
  EXPECT_EQ(invoke({"run", "--policy", "greedy", "--output-dir", dir_.string()}).code, 1);
}

class OracleFault : public ::testing::TestWithParam<const char*> {};

TEST_P(OracleFault, OnlyTheCorruptedOracleFails) {
  const auto results = cli::run_oracles(GetParam());
  for (const auto& r : results) EXPECT_EQ(r.passed, r.name != GetParam()) << r.name;
}

INSTANTIATE_TEST_SUITE_P(Suite, OracleFault,
                         ::testing::Values("care_scalar", "care_double_integrator", "care_random",
                                           "matching_brute_force", "kantorovich_permutation",
                                           "cost_consistency", "stationarity",
                                           "simd_equivalence"));
