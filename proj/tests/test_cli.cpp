#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "test_util.hpp"

namespace cablequad {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cablequad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string out_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cablequad_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

TEST(Cli, UnknownVerbShowsUsage) {
  const Result r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitBadInput);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, cli::kExitBadInput);
  EXPECT_EQ(run_cli({"simulate", "--dt-int", "abc"}).code, cli::kExitBadInput);
}

TEST(Cli, BadScenarioIsBadInput) {
  EXPECT_EQ(run_cli({"simulate", "--scenario", "/nonexistent_dir/s.json"}).code, cli::kExitBadInput);
  EXPECT_EQ(run_cli({"simulate", "--dt-int", "0.01", "--out", out_dir("bad")}).code, cli::kExitBadInput);
}

TEST(Cli, SimulateWithoutIntegralReportsOffset) {
  const std::string dir = out_dir("sim");
  const Result r = run_cli({"simulate", "--no-integral", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("integral: off"), std::string::npos);
  const auto pos = r.out.find("final_position_error: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GE(std::stod(r.out.substr(pos + 22)), 0.01);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "paper-sim.csv"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "paper-sim.gp"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "paper-sim_metrics.txt"));
}

TEST(Cli, SimulateIsReproducible) {
  const std::string a = out_dir("rep_a");
  const std::string b = out_dir("rep_b");
  ASSERT_EQ(run_cli({"simulate", "--duration", "0.5", "--out", a}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"simulate", "--duration", "0.5", "--out", b}).code, cli::kExitOk);
  const auto ta = sim::read_csv(std::filesystem::path(a) / "paper-sim.csv");
  const auto tb = sim::read_csv(std::filesystem::path(b) / "paper-sim.csv");
  EXPECT_EQ(ta.rows, tb.rows);
  EXPECT_EQ(ta.rows.size(), 501u);
}

TEST(Cli, LinearizeWritesMatrices) {
  const std::string dir = out_dir("lin");
  const Result r = run_cli({"linearize", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(std::filesystem::path(dir) / "linearization.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const char* key : {"M 13 13", "G 13 13", "B 13 3", "A_closed 26 26", "B_closed 26 13", "eigenvalues 26 2"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

// The reference gains do not satisfy the W-matrix inequality, so the
// certificate verb reports failure.
TEST(Cli, CertifyReportsWMatrixShortfall) {
  const Result r = run_cli({"certify", "--out", out_dir("cert")});
  EXPECT_EQ(r.code, cli::kExitFailed);
  EXPECT_NE(r.out.find("failed: W_positive_definite\n"), std::string::npos);
  EXPECT_NE(r.out.find("integral_feasible: true"), std::string::npos);
}

TEST(Cli, ValidatePasses) {
  const Result r = run_cli({"validate", "--duration", "2", "--seed", "5", "--out", out_dir("val")});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out;
  EXPECT_NE(r.out.find("validation passed"), std::string::npos);
}

TEST(Cli, DemoVerbComparesBothRuns) {
  const std::string dir = out_dir("demo");
  const Result r = run_cli({"demo-paper", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("no_integral"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "demo_paper_report.txt"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "paper-sim_integral.csv"));
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "paper-sim_no_integral.csv"));
}

}  // namespace
}  // namespace cablequad
