#include <grmkit/serialize.hpp>
#include <grmkit/synth.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = GRMKIT_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = "/tmp/grmkit_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);

    grmkit::SyntheticSpec spec;
    spec.p = 8;
    spec.n = 120;
    spec.structure = grmkit::BandedStructure{1};
    spec.seed = 7;
    grmkit::save_json(grmkit::to_json(spec), dir_ + "/spec.json");
    const auto market = grmkit::generate(spec);
    grmkit::save_returns(market.panel, dir_ + "/returns.csv");

    std::ofstream factors(dir_ + "/factors.csv");
    factors << "date,MKT\n";
    grmkit::CounterRng rng(3);
    for (const auto& ts : market.panel.timestamps)
      factors << ts << "," << rng.next_normal() * 0.01 << "\n";

    std::ofstream sectors(dir_ + "/sectors.csv");
    sectors << "symbol,sector\n";
    for (std::size_t i = 0; i < market.panel.asset_ids.size(); ++i)
      sectors << market.panel.asset_ids[i] << ","
              << (i % 2 ? "Tech" : "Energy") << "\n";
  }

  std::string dir_;
};

TEST_F(CliTest, FitGlassoWritesValidModel) {
  ASSERT_EQ(run("fit --method glasso --lambda 0.05 --input " + dir_ +
                "/returns.csv --out " + dir_ + "/m"),
            0);
  ASSERT_TRUE(fs::exists(dir_ + "/m/model.json"));
  ASSERT_TRUE(fs::exists(dir_ + "/m/summary.txt"));
  const auto wrapper = grmkit::load_json(dir_ + "/m/model.json");
  const auto est = grmkit::precision_from_json(wrapper.at("model"));
  EXPECT_EQ(est.method, grmkit::Method::glasso);
  EXPECT_TRUE(est.converged);
  EXPECT_EQ(wrapper.at("config").at("command"), "fit");
}

TEST_F(CliTest, FitWithCrossValidationReportsLambda) {
  ASSERT_EQ(run("fit --method glasso --cv 3 --input " + dir_ +
                "/returns.csv --out " + dir_ + "/mcv"),
            0);
  std::ifstream in(dir_ + "/mcv/summary.txt");
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  EXPECT_NE(body.find("cross-validated lambda"), std::string::npos);
}

TEST_F(CliTest, MissingInputExitsOne) {
  EXPECT_EQ(run("fit --method glasso --lambda 0.1 --input " + dir_ +
                "/nope.csv --out " + dir_ + "/x"),
            1);
}

TEST_F(CliTest, FlagMisuseExitsTwo) {
  EXPECT_EQ(run("fit --method glasso --input " + dir_ + "/returns.csv"),
            2);  // neither --lambda nor --cv
  EXPECT_EQ(run("fit --input " + dir_ + "/returns.csv"), 2);  // --method missing
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(CliTest, EvalProducesSortedReport) {
  ASSERT_EQ(run("fit --method glasso --lambda 0.05 --input " + dir_ +
                "/returns.csv --split-date 2000-03-15 --out " + dir_ + "/g"),
            0);
  ASSERT_EQ(run("fit --method pca --k 2 --input " + dir_ +
                "/returns.csv --split-date 2000-03-15 --out " + dir_ + "/p"),
            0);
  ASSERT_EQ(run("eval --model " + dir_ + "/g/model.json --model " + dir_ +
                "/p/model.json --input " + dir_ +
                "/returns.csv --split-date 2000-03-15 --out " + dir_ + "/r"),
            0);
  std::ifstream in(dir_ + "/r/report.csv");
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header, grmkit::eval_csv_header());
  EXPECT_EQ(row1.rfind("grm_glasso,", 0), 0u);  // sorted by label
  EXPECT_EQ(row2.rfind("pca_2,", 0), 0u);
}

TEST_F(CliTest, EvalExogenousWithoutFactorsExitsTwo) {
  ASSERT_EQ(run("fit --method exogenous --factors " + dir_ +
                "/factors.csv --input " + dir_ + "/returns.csv --out " + dir_ +
                "/e"),
            0);
  EXPECT_EQ(run("eval --model " + dir_ + "/e/model.json --input " + dir_ +
                "/returns.csv --out " + dir_ + "/re"),
            2);
  EXPECT_EQ(run("eval --model " + dir_ + "/e/model.json --factors " + dir_ +
                "/factors.csv --input " + dir_ + "/returns.csv --out " + dir_ +
                "/re2"),
            0);
}

TEST_F(CliTest, GraphExportHasSignAttributes) {
  ASSERT_EQ(run("fit --method glasso --lambda 0.02 --input " + dir_ +
                "/returns.csv --out " + dir_ + "/gm"),
            0);
  ASSERT_EQ(run("graph --model " + dir_ + "/gm/model.json --format graphml "
                "--out " + dir_ + "/graph.graphml"),
            0);
  std::ifstream in(dir_ + "/graph.graphml");
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  EXPECT_NE(body.find("attr.name=\"sign\""), std::string::npos);
}

TEST_F(CliTest, CommunitiesOnDisconnectedComponents) {
  // banded omega with width 1 gives a connected chain; cut to 3
  ASSERT_EQ(run("fit --method glasso --lambda 0.02 --input " + dir_ +
                "/returns.csv --out " + dir_ + "/cm"),
            0);
  ASSERT_EQ(run("communities --model " + dir_ + "/cm/model.json --k 3 "
                "--sectors " + dir_ + "/sectors.csv --out " + dir_ + "/comm"),
            0);
  ASSERT_TRUE(fs::exists(dir_ + "/comm/communities.csv"));
  ASSERT_TRUE(fs::exists(dir_ + "/comm/communities.json"));
  ASSERT_TRUE(fs::exists(dir_ + "/comm/sector_community_counts.csv"));
  std::ifstream in(dir_ + "/comm/communities.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "symbol,community");
}

TEST_F(CliTest, SynthIsReproducible) {
  ASSERT_EQ(run("synth --spec " + dir_ + "/spec.json --out " + dir_ + "/a.csv"),
            0);
  ASSERT_EQ(run("synth --spec " + dir_ + "/spec.json --out " + dir_ + "/b.csv"),
            0);
  std::ifstream a(dir_ + "/a.csv"), b(dir_ + "/b.csv");
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa.find("A0001"), std::string::npos);
}

TEST_F(CliTest, BetaCommandEmitsDiagnostics) {
  ASSERT_EQ(run("fit --method glasso --lambda 0.02 --input " + dir_ +
                "/returns.csv --out " + dir_ + "/bm"),
            0);
  ASSERT_EQ(run("beta --model " + dir_ + "/bm/model.json --input " + dir_ +
                "/returns.csv --k 2 --out " + dir_ + "/beta"),
            0);
  const auto j = grmkit::load_json(dir_ + "/beta/beta.json");
  EXPECT_TRUE(j.at("model").contains("angles"));
  EXPECT_TRUE(j.at("model").contains("implied_diagnostics"));
}

TEST_F(CliTest, BacktestWritesPeriods) {
  ASSERT_EQ(run("backtest --input " + dir_ + "/returns.csv --recipe pca --k 2 "
                "--window 40 --step 40 --out " + dir_ + "/bt.csv"),
            0);
  std::ifstream in(dir_ + "/bt.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "period,r2_mean");
  int rows = 0;
  while (std::getline(in, row))
    if (!row.empty()) ++rows;
  EXPECT_EQ(rows, 2);  // floor((120 - 40) / 40)
}

}  // namespace
