// End-to-end runs of the command-line tool.

#include "semiinfo/io.hpp"
#include "semiinfo/zoo.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace semiinfo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("semiinfo_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

  int run(const std::string& config, const std::string& out, const std::string& extra = "") const {
    const std::string cmd = std::string(SEMIINFO_CLI) + " --config " + config + " --out " + (dir_ / out).string() +
                            " " + extra + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  json report(const std::string& out) const { return json::parse(read_file(dir_ / out / "report.json")); }
  Matrix csv(const std::string& out, const std::string& name) const {
    return matrix_from_csv(read_file(dir_ / out / name));
  }

  // Every matrix CSV in `out` must reproduce its bytes through a parse/format cycle.
  void expect_csvs_round_trip(const std::string& out) const {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(dir_ / out)) {
      const std::string name = entry.path().filename().string();
      EXPECT_EQ(name.find(".tmp"), std::string::npos) << "leftover temporary " << name;
      if (entry.path().extension() != ".csv") continue;
      const std::string text = read_file(entry.path());
      if (name == "measure.csv") {
        EXPECT_EQ(text.rfind("point,mass\n", 0), 0u);
        continue;
      }
      EXPECT_EQ(matrix_to_csv(matrix_from_csv(text)), text) << name;
      ++count;
    }
    EXPECT_GT(count, 0u);
  }

  fs::path dir_;
};

std::string without_timestamp(json j) {
  j.erase("timestamp");
  return j.dump();
}

}  // namespace

TEST_F(Cli, AnalyzeRightCensoredIsCategoryOne) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "analyze",
      "model": {"id": "cox_rc"}, "theta": [0.0]})");
  ASSERT_EQ(run(cfg, "a"), 0);
  const json r = report("a");
  EXPECT_EQ(r["category"], "Cat1");
  EXPECT_TRUE(r.contains("timestamp"));
  EXPECT_EQ(csv("a", "kappa.csv").cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((csv("a", "lfd.csv").array() - 0.5).abs().maxCoeff(), 1e-12);
  expect_csvs_round_trip("a");
}

TEST_F(Cli, AnalyzeCurrentStatusIsCategoryTwo) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "analyze",
      "model": {"id": "cox_cs"}, "theta": [0.0]})");
  ASSERT_EQ(run(cfg, "a"), 0);
  EXPECT_EQ(report("a")["category"], "Cat2");
  // gamma = -E[f_dot g] cancels in expectation, so zero holds up to roundoff.
  EXPECT_LT(csv("a", "gamma.csv").cwiseAbs().maxCoeff(), 1e-15);
  expect_csvs_round_trip("a");
}

TEST_F(Cli, ReportsAreDeterministic) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "analyze",
      "model": {"id": "missing_cov"}, "theta": [0.5], "engine": {"kind": "monte_carlo", "n": 3000}})");
  ASSERT_EQ(run(cfg, "a", "--seed 9"), 0);
  ASSERT_EQ(run(cfg, "b", "--seed 9"), 0);
  ASSERT_EQ(run(cfg, "c", "--seed 10"), 0);
  EXPECT_EQ(without_timestamp(report("a")), without_timestamp(report("b")));
  EXPECT_NE(without_timestamp(report("a")), without_timestamp(report("c")));
  for (const char* f : {"gamma.csv", "kappa.csv", "lfd.csv"})
    EXPECT_EQ(read_file(dir_ / "a" / f), read_file(dir_ / "b" / f)) << f;
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run(write("bad.json", "{not json"), "x"), 2);
  EXPECT_EQ(run((dir_ / "missing.json").string(), "x"), 2);
  EXPECT_EQ(run(write("v.json", R"({"command": "analyze", "model": {"id": "cox_rc"}, "theta": [0]})"), "x"), 2);
  EXPECT_EQ(run(write("t.json", R"({"schema_version": 1, "command": "analyze", "model": {"id": "cox_rc"}})"), "x"), 2);
  EXPECT_EQ(run(write("m.json", R"({"schema_version": 1, "model": {"id": "weibull"}, "theta": [0]})"), "x"), 2);
  const std::string ok = write("ok.json", R"({"schema_version": 1, "model": {"id": "cox_rc"}, "theta": [0]})");
  EXPECT_EQ(run(ok, "x", "--command fit"), 2);
  EXPECT_FALSE(fs::exists(dir_ / "x" / "report.json"));
}

TEST_F(Cli, CommandFlagOverridesConfig) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "analyze",
      "model": {"id": "kaplan_meier"}, "theta": [], "functional": {"kind": "survival_at", "t": 2}})");
  ASSERT_EQ(run(cfg, "i", "--command influence"), 0);
  EXPECT_EQ(report("i")["command"], "influence");
}

TEST_F(Cli, ValidateWithoutLadderOnNonIdentifiableMixture) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "validate",
      "model": {"id": "mixture", "params": {"trials": 3}}, "theta": []})");
  ASSERT_EQ(run(cfg, "v"), 0);
  const json r = report("v");
  EXPECT_EQ(r["failed"], 0);
  EXPECT_GT(r["total"].get<int>(), 10);
}

TEST_F(Cli, ValidateCatchesKappaMutation) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "validate",
      "model": {"id": "cox_cs"}, "theta": [0.0], "validate": {"mutate_kappa": true}})");
  EXPECT_EQ(run(cfg, "v"), 1);
  EXPECT_GT(report("v")["failed"].get<int>(), 0);
}

TEST_F(Cli, KaplanMeierInfluenceMatchesClosedForm) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "influence",
      "model": {"id": "kaplan_meier"}, "theta": [], "functional": {"kind": "survival_at", "t": 2}})");
  ASSERT_EQ(run(cfg, "i"), 0);
  const json r = report("i");
  EXPECT_EQ(r["non_regular"], false);
  EXPECT_LT(r["closed_form_max_gap"].get<double>(), 1e-10);

  const KaplanMeierParams p;
  const ZooModel m = build_kaplan_meier(p);
  const Matrix table = csv("i", "influence.csv");
  ASSERT_EQ(table.rows(), static_cast<Eigen::Index>(m.exact->outcomes.size()));
  ASSERT_EQ(table.cols(), 2);
  for (const Observation& o : m.exact->outcomes) {
    const auto row = static_cast<Eigen::Index>(o.id);
    EXPECT_EQ(table(row, 0), static_cast<double>(o.id));
    EXPECT_NEAR(table(row, 1), km_influence_closed_form(p, m.state.eta, 2.0, o), 1e-10);
  }
  expect_csvs_round_trip("i");
}

TEST_F(Cli, ZeroFunctionalHasZeroInfluence) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "influence",
      "model": {"id": "kaplan_meier"}, "theta": []})");
  ASSERT_EQ(run(cfg, "i"), 0);
  EXPECT_EQ(csv("i", "influence.csv").col(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(Cli, MixturePointMassWithoutLadderIsIllPosed) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "influence",
      "model": {"id": "mixture", "params": {"trials": 3}}, "theta": [],
      "functional": {"kind": "point_at", "t": 3}})");
  ASSERT_EQ(run(cfg, "i"), 0);
  const json r = report("i");
  EXPECT_EQ(r["non_regular"], true);
  EXPECT_EQ(r["ill_posed"], true);
}

TEST_F(Cli, MixturePointMassWithLadderIsNonRegular) {
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "influence",
      "model": {"id": "mixture", "params": {"trials": 3}}, "theta": [],
      "functional": {"kind": "point_at", "t": 3}, "ridge_ladder": [1e-2, 1e-4, 1e-6, 1e-8]})");
  ASSERT_EQ(run(cfg, "i"), 0);
  const json r = report("i");
  EXPECT_EQ(r["non_regular"], true);
  EXPECT_EQ(r["ill_posed"], false);
  EXPECT_EQ(r["ridge_ladder"].size(), 4u);
}

TEST_F(Cli, ParamcheckBlockDiagonal) {
  write("m.csv", matrix_to_csv(Matrix{{2.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 5.0}}));
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "paramcheck",
      "matrix": {"path": "m.csv", "p": 1}})");
  ASSERT_EQ(run(cfg, "p"), 0);
  EXPECT_EQ(csv("p", "efficient_information.csv"), Matrix::Constant(1, 1, 2.0));
  EXPECT_EQ(report("p")["invertibility_equivalent"], true);
  expect_csvs_round_trip("p");
}

TEST_F(Cli, ParamcheckRandomPositiveDefinite) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  Matrix a(5, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
  Matrix full = a * a.transpose() + Matrix::Identity(5, 5);
  full = (0.5 * (full + full.transpose())).eval();
  write("m.csv", matrix_to_csv(full));
  const std::string cfg = write("c.json", R"({"schema_version": 1, "command": "paramcheck",
      "matrix": {"path": "m.csv", "p": 2}})");
  ASSERT_EQ(run(cfg, "p"), 0);
  const json r = report("p");
  EXPECT_LE(r["identity_discrepancy"].get<double>(), 1e-10);
  EXPECT_GE(r["min_eigen_ordering"].get<double>(), -1e-9);
  const Matrix expected = full.inverse().topLeftCorner(2, 2).inverse();
  EXPECT_LT((csv("p", "efficient_information.csv") - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(Cli, ParamcheckNumericalFailures) {
  write("rank.csv", "# 3,3\n1,0,0\n0,1,1\n0,1,1\n");
  EXPECT_EQ(run(write("r.json", R"({"schema_version": 1, "command": "paramcheck",
      "matrix": {"path": "rank.csv", "p": 1}})"), "r"), 3);
  write("asym.csv", "# 2,2\n2,1\n0,2\n");
  EXPECT_EQ(run(write("a.json", R"({"schema_version": 1, "command": "paramcheck",
      "matrix": {"path": "asym.csv", "p": 1}})"), "a"), 3);
  write("short.csv", "# 2,2\n2,1\n");
  EXPECT_EQ(run(write("s.json", R"({"schema_version": 1, "command": "paramcheck",
      "matrix": {"path": "short.csv", "p": 1}})"), "s"), 2);
}
