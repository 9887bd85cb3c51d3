#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(OICA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_out" / name;
  fs::remove_all(dir);
  return dir;
}

TEST(Cli, MomentsWritesCsvAndSummary) {
  const auto dir = fresh_dir("moments");
  ASSERT_EQ(run("moments --betas 0:0.1:1 --out-dir " + dir.string()), 0);
  const std::string csv = slurp(dir / "moments.csv");
  EXPECT_EQ(csv.substr(0, 11), "beta,m4,m6\n");
  const auto row = csv.find("\n0.6,");
  ASSERT_NE(row, std::string::npos) << csv;
  EXPECT_NEAR(std::stod(csv.substr(row + 5)), 2.24928, 1e-12);
  EXPECT_NE(csv.find("\n1,1,1\n"), std::string::npos) << csv;
  const auto doc = nlohmann::json::parse(slurp(dir / "moments_summary.json"));
  EXPECT_DOUBLE_EQ(doc["grid_argmax"]["m4"].get<double>(), 0.6);
  EXPECT_DOUBLE_EQ(doc["grid_argmax"]["m6"].get<double>(), 0.6);
  EXPECT_NEAR(doc["continuous_max_m4"].get<double>(), 2.25, 1e-10);
}

TEST(Cli, PhaseTableHasNaNMarkers) {
  const auto dir = fresh_dir("phase");
  ASSERT_EQ(run("phase --decimals 3 --out-dir " + dir.string()), 0);
  const std::string csv = slurp(dir / "phase_table.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,beta=0,beta=0.3,beta=0.6,beta=0.8,beta=1");
  EXPECT_NE(csv.find("0.03,0.229,0.289,0.480,0.304,0.125"), std::string::npos) << csv;
  EXPECT_NE(csv.find("0.06,NaN,NaN,NaN,NaN,0.270"), std::string::npos) << csv;
}

TEST(Cli, JsonFormat) {
  const auto dir = fresh_dir("phase_json");
  ASSERT_EQ(run("phase --format json --out-dir " + dir.string()), 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "phase_table.json"));
  ASSERT_TRUE(doc.contains("beta=0.6"));
  EXPECT_TRUE(doc["beta=0.6"][2].is_null());
  EXPECT_NEAR(doc["beta=0.6"][1].get<double>(), 0.480, 0.002);
}

TEST(Cli, DriftMarkersOnlyForExistingThresholds) {
  const auto dir = fresh_dir("drift");
  ASSERT_EQ(run("drift --tau 0.05 --betas 0,0.6,1 --q-points 100 --out-dir " + dir.string()), 0);
  const std::string markers = slurp(dir / "drift_markers.csv");
  EXPECT_EQ(markers.find("0.6,"), std::string::npos) << markers;
  EXPECT_NE(markers.find("\n1,0.219"), std::string::npos) << markers;
  EXPECT_TRUE(fs::exists(dir / "drift_beta=0.6.csv"));
}

TEST(Cli, CriticalTau) {
  const auto dir = fresh_dir("critical");
  ASSERT_EQ(run("critical-tau --out-dir " + dir.string()), 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "critical_tau_summary.json"));
  EXPECT_DOUBLE_EQ(doc["argmin_beta"].get<double>(), 0.6);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRunsAndJobs) {
  const std::string args =
      "simulate --seed 7 --betas 0.6,1 --q0 0.35 --n 400 --trials 3 --t-end 20 --engine full ";
  const auto a = fresh_dir("sim_a");
  const auto b = fresh_dir("sim_b");
  ASSERT_EQ(run(args + "--jobs 1 --out-dir " + a.string()), 0);
  ASSERT_EQ(run(args + "--jobs 2 --out-dir " + b.string()), 0);
  for (const char* f : {"simulate_beta=0.6_q0=0.35.csv", "simulate_beta=1_q0=0.35.csv"}) {
    const std::string sa = slurp(a / f);
    ASSERT_FALSE(sa.empty()) << f;
    EXPECT_EQ(sa, slurp(b / f)) << f;
  }
  auto ja = nlohmann::json::parse(slurp(a / "simulate_summary.json"));
  auto jb = nlohmann::json::parse(slurp(b / "simulate_summary.json"));
  EXPECT_EQ(ja["runs"], jb["runs"]);
  EXPECT_EQ(ja["runs"][1]["ode_classification"], "informative");
}

TEST(Cli, ConfigFileWithOverride) {
  const auto dir = fresh_dir("config");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# phase settings\ntaus = 0.02,0.03\nbetas = 1\ndecimals = 3\n";
  ASSERT_EQ(run("phase --config " + cfg.string() + " --taus 0.05 --out-dir " + dir.string()), 0);
  EXPECT_EQ(slurp(dir / "phase_table.csv"), "tau,beta=1\n0.05,0.220\n");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("nonsense"), 2);
  EXPECT_EQ(run("simulate --n 100"), 2);
  EXPECT_EQ(run("moments --betas 0,2"), 2);
  EXPECT_EQ(run("moments --betas ''"), 2);
  EXPECT_EQ(run("compare --seed 1 --n 10 --trials 2 --t-end 1 --tau -1"), 2);
  EXPECT_EQ(run("phase --taus 0.05,0.02"), 2);
  EXPECT_EQ(run("phase --format xml"), 2);
  EXPECT_EQ(run("phase --config /nonexistent/cfg"), 3);
  const auto blocker = fresh_dir("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file";
  EXPECT_EQ(run("moments --out-dir " + (blocker / "sub").string()), 3);
}

TEST(Cli, CompareExitsOneWhenDeviationExceedsLimit) {
  const auto dir = fresh_dir("compare");
  const std::string base = "compare --seed 3 --n 200 --trials 2 --t-end 4 --out-dir " + dir.string();
  EXPECT_EQ(run(base + " --max-deviation 1e-9"), 1);
  const auto doc = nlohmann::json::parse(slurp(dir / "compare_report.json"));
  EXPECT_TRUE(doc["finite_size_regime"].get<bool>());
  EXPECT_EQ(run(base + " --max-deviation 1"), 0);
}

}  // namespace
