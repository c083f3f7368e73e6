#include "owkg/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "owkg/common.hpp"

namespace owkg {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("owkg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

TEST(ParseGrid, InclusiveEndpoints) {
  const auto g = parse_grid("0.3:1.0:0.1");
  ASSERT_EQ(g.size(), 8u);
  EXPECT_EQ(g.front(), 0.3);
  EXPECT_EQ(g[3], 0.6);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(parse_grid("0.30:1.00:0.05").size(), 15u);
  EXPECT_EQ(parse_grid("0.2:0.8:0.2"), (std::vector<double>{0.2, 0.4, 0.6, 0.8}));
  EXPECT_EQ(parse_grid("0:1:0.3"), (std::vector<double>{0.0, 0.3, 0.6, 0.9}));
  EXPECT_EQ(parse_grid("5:5:1"), (std::vector<double>{5.0}));
  EXPECT_EQ(parse_grid("1e-3:3e-3:1e-3"), (std::vector<double>{0.001, 0.002, 0.003}));
}

TEST(ParseGrid, ListsAndErrors) {
  EXPECT_EQ(parse_grid("-0.3,0,0.3"), (std::vector<double>{-0.3, 0.0, 0.3}));
  EXPECT_EQ(parse_grid("0.35"), (std::vector<double>{0.35}));
  EXPECT_THROW(parse_grid("0:1:0"), DomainError);
  EXPECT_THROW(parse_grid("1:0:0.1"), DomainError);
  EXPECT_THROW(parse_grid("0:1"), DomainError);
  EXPECT_THROW(parse_grid("a,b"), DomainError);
  EXPECT_THROW(parse_grid("0.1x"), DomainError);
  EXPECT_THROW(parse_grid(""), DomainError);
}

TEST_F(CliTest, SimulateExampleHasEightRows) {
  const CliRun r = cli({"simulate", "--l-grid", "0.3:1.0:0.1", "--alpha", "0.35", "--metric", "mrr",
                     "--repeats", "500", "--seed", "7", "--out", out()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "simulate.csv"));
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], "# schema: owkg.simulate/1");
  EXPECT_EQ(rows[1], "l,alpha,rho,metric,mean,std,repeats,skipped");
  EXPECT_EQ(rows[2].rfind("0.3,0.35,0,mrr,", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "simulate.manifest.json"));
}

TEST_F(CliTest, AnalyticExampleHasOneRow) {
  const CliRun r = cli({"analytic", "--l", "0.7", "--beta", "0.35", "--n", "43", "--metric", "mrr",
                     "--out", out()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "analytic.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NE(rows[1].find("exact,delta_upper,approx,approx_error_bound"), std::string::npos);
  // No field is empty for MRR at rho = 0.
  EXPECT_EQ(rows[2].find(",,"), std::string::npos);
}

TEST_F(CliTest, GenerateSplitQueriesPipeline) {
  ASSERT_EQ(cli({"gen-kg", "--trees", "20", "--depth", "3", "--per-tree", "300", "--seed", "1",
                 "--out", out()})
                .status,
            0);
  const auto gen = nlohmann::json::parse(slurp(dir_ / "gen-kg.manifest.json"));
  EXPECT_EQ(gen["results"]["entities"], 6000);
  EXPECT_EQ(gen["results"]["violations"], 0);

  ASSERT_EQ(cli({"split", "--d", "0.75", "--eta", "0.7", "--seed", "2", "--out", out()}).status, 0);
  const auto split = nlohmann::json::parse(slurp(dir_ / "split.manifest.json"));
  EXPECT_NEAR(split["results"]["alpha"].get<double>(), 0.47, 0.005);

  ASSERT_EQ(cli({"queries", "--n", "60", "--seed", "3", "--out", out()}).status, 0);
  EXPECT_EQ(lines(slurp(dir_ / "queries.jsonl")).size(), 60u);

  const CliRun p = cli({"pipeline", "--l", "0.2:1.0:0.4", "--metric", "mrr", "--metric", "p_mrr@0.25",
                     "--seed", "4", "--out", out()});
  ASSERT_EQ(p.status, 0) << p.err;
  const auto rows = lines(slurp(dir_ / "pipeline.csv"));
  ASSERT_EQ(rows.size(), 2u + 3 * 2);
  EXPECT_EQ(rows[1].rfind("model_id,l_nominal,rho,d,metric,sparse_mean,sparse_std,full_mean,full_std,"
                          "n_queries",
                          0),
            0u);
  EXPECT_NE(rows.back().find(",1,0,0.75,p_mrr@0.25,"), std::string::npos);

  // Correlated split records the realized correlation.
  ASSERT_EQ(cli({"split", "--rho", "0.2", "--seed", "2", "--out", out("corr")}) .status, 1);
  ASSERT_EQ(cli({"split", "--kg", out("kg"), "--rho", "0.2", "--seed", "2", "--out", out("corr")})
                .status,
            0);
  const auto corr = nlohmann::json::parse(slurp(dir_ / "corr" / "split.manifest.json"));
  EXPECT_NEAR(corr["results"]["rho_empirical"].get<double>(), 0.2, 0.02);
}

TEST_F(CliTest, ReplayIsByteIdentical) {
  ASSERT_EQ(cli({"compare", "--l", "0.3:0.9:0.3", "--beta", "0.2,0.6", "--rho", "-0.2,0,0.2",
                 "--repeats", "200", "--seed", "5", "--out", out("a")})
                .status,
            0);
  const CliRun r = cli({"--replay", out("a/compare.manifest.json"), "--out", out("b")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "a" / "compare.csv"), slurp(dir_ / "b" / "compare.csv"));
  const auto a = nlohmann::json::parse(slurp(dir_ / "a" / "compare.manifest.json"));
  const auto b = nlohmann::json::parse(slurp(dir_ / "b" / "compare.manifest.json"));
  EXPECT_EQ(a["args"], b["args"]);
  EXPECT_EQ(a["results"], b["results"]);
}

TEST_F(CliTest, CompareUsesSimulateSeeds) {
  ASSERT_EQ(cli({"simulate", "--l", "0.5,0.9", "--beta", "0.4", "--repeats", "100", "--seed", "9",
                 "--out", out()})
                .status,
            0);
  ASSERT_EQ(cli({"compare", "--l", "0.5,0.9", "--beta", "0.4", "--repeats", "100", "--seed", "9",
                 "--out", out()})
                .status,
            0);
  const auto sim = lines(slurp(dir_ / "simulate.csv"));
  const auto cmp = lines(slurp(dir_ / "compare.csv"));
  ASSERT_EQ(sim.size(), cmp.size());
  for (std::size_t i = 2; i < sim.size(); ++i) {
    // l, alpha, rho, metric, mean, std, repeats, skipped agree.
    EXPECT_EQ(cmp[i].rfind(sim[i], 0), 0u) << sim[i] << " vs " << cmp[i];
  }
}

TEST_F(CliTest, VarianceAndMinimumQueries) {
  const CliRun r = cli({"variance", "--l", "0.7", "--beta", "0.35", "--v", "7.4e-3", "--dl",
                     "0.05,0.01", "--out", out()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "variance.csv"));
  const auto rows = lines(slurp(dir_ / "min_queries.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NE(rows[2].find(",given,"), std::string::npos);
  const CliRun est = cli({"variance", "--repeats", "2000", "--format", "json", "--out", out()});
  ASSERT_EQ(est.status, 0) << est.err;
  const auto doc = nlohmann::json::parse(slurp(dir_ / "variance.json"));
  EXPECT_EQ(doc["schema"], "owkg.variance/1");
  EXPECT_GT(doc["rows"][0]["variance"].get<double>(), 0.0);
}

TEST_F(CliTest, InconsistencyComparison) {
  const CliRun r = cli({"compare", "--kind", "inconsistency", "--l", "0.7", "--beta", "0.35", "--dl",
                     "0.2", "--trials", "200", "--variance-repeats", "2000", "--out", out()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = lines(slurp(dir_ / "inconsistency.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(cli({"compare", "--kind", "inconsistency", "--l", "0.5,0.7", "--out", out()}).status, 1);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
  ::setenv(kOutDirEnv, out("env").c_str(), 1);
  const CliRun r = cli({"analytic"});
  ::unsetenv(kOutDirEnv);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "env" / "analytic.csv"));
}

TEST_F(CliTest, ErrorsExitNonzero) {
  CliRun r = cli({"simulate", "--bogus", "1", "--out", out()});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  r = cli({"frobnicate"});
  EXPECT_NE(r.status, 0);
  r = cli({"--out", out()});
  EXPECT_NE(r.status, 0);
  r = cli({"simulate", "--repeats", "0", "--out", out()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("repeats"), std::string::npos);
  r = cli({"analytic", "--l", "1.5", "--out", out()});
  EXPECT_EQ(r.status, 1);
  r = cli({"analytic", "--rho", "0.99", "--out", out()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("feasible"), std::string::npos);
  r = cli({"simulate", "--alpha", "0.3", "--beta", "0.7", "--out", out()});
  EXPECT_NE(r.status, 0);
  r = cli({"split", "--kg", out("nowhere"), "--out", out()});
  EXPECT_EQ(r.status, 1);
  r = cli({"--help"});
  EXPECT_EQ(r.status, 0);
}

}  // namespace
}  // namespace owkg
