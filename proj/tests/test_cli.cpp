#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "recsim/catalog.hpp"
#include "recsim/cli.hpp"
#include "recsim/session.hpp"
#include "recsim/store.hpp"

using namespace recsim;
namespace fs = std::filesystem;

namespace {

const std::string kConfig = std::string(RECSIM_DATA_DIR) + "/config.json";

struct Run {
  int rc;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) v.push_back(l);
  }
  return v;
}

fs::path scratch() {
  const auto p = fs::temp_directory_path() / "recsim_cli_test";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, SimulateWritesOneLinePerSession) {
  const auto r = cli({"simulate", "--config", kConfig, "--user", "u01"});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  for (const auto& l : ls) {
    const auto t = trajectory_from_json(Json::parse(l));
    EXPECT_EQ(t.user_id, "u01");
    EXPECT_TRUE(t.finished());
    EXPECT_TRUE(t.annotations.contains("reward"));
  }
  EXPECT_EQ(cli({"simulate", "--config", kConfig, "--user", "u01"}).out, r.out);
  const auto two = cli({"simulate", "--config", kConfig, "--user", "u01,u02", "--seeds", "4,5"});
  EXPECT_EQ(lines(two.out).size(), 4u);
}

TEST(Cli, SimulateStoreAndExport) {
  const auto dir = scratch();
  const auto store = (dir / "t.jsonl").string();
  ASSERT_EQ(cli({"simulate", "--config", kConfig, "--user", "u01,u02", "--store", store, "--out",
                 (dir / "o.jsonl").string()})
                .rc,
            0);
  const auto all = cli({"export", "--store", store});
  EXPECT_EQ(lines(all.out).size(), 6u);
  EXPECT_EQ(lines(cli({"export", "--store", store, "--user", "u02"}).out).size(), 3u);
  EXPECT_EQ(lines(cli({"export", "--store", store, "--mode", "Traditional"}).out).size(), 0u);
  EXPECT_EQ(cli({"export", "--store", store, "--mode", "Sideways"}).rc, 1);

  const auto judged = cli({"judge", "--in", (dir / "o.jsonl").string(), "--config", kConfig, "--retained",
                           (dir / "keep.jsonl").string()});
  ASSERT_EQ(judged.rc, 0) << judged.err;
  const auto summary = Json::parse(judged.out);
  EXPECT_EQ(summary["total"], 6);
  EXPECT_EQ(summary["retained"].get<int>() + summary["rejected"].get<int>(), 6);
  fs::remove_all(dir);
}

TEST(Cli, ReplayEvalSynthetic) {
  const auto r = cli({"replay-eval", "--synthetic", "20", "--seed", "3"});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["per_user"].size(), 20u);
  EXPECT_GT(j["aggregate"]["ndcg_final"].get<double>(), j["aggregate"]["ndcg_initial"].get<double>());
  const auto table = cli({"replay-eval", "--synthetic", "5", "--table"});
  EXPECT_NE(table.out.find("ndcg_f"), std::string::npos);
  EXPECT_EQ(cli({"replay-eval"}).rc, 2);
  EXPECT_EQ(cli({"replay-eval", "--synthetic", "3", "--dataset", "x"}).rc, 2);
}

TEST(Cli, PopulationWithVariance) {
  const auto r = cli({"population", "--config", kConfig, "--ticks", "4", "--schedule", "1,4", "--seeds", "1,2"});
  ASSERT_EQ(r.rc, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["report"]["checkpoints"].size(), 2u);
  EXPECT_TRUE(j.contains("variance"));
  const auto single = Json::parse(cli({"population", "--config", kConfig, "--ticks", "2", "--schedule", "2", "--seeds", "1"}).out);
  EXPECT_FALSE(single.contains("variance"));
  EXPECT_EQ(cli({"population", "--config", kConfig, "--ticks", "2", "--schedule", "1,3"}).rc, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).rc, 2);
  EXPECT_EQ(cli({"fly"}).rc, 2);
  EXPECT_EQ(cli({"simulate"}).rc, 2);
  EXPECT_EQ(cli({"simulate", "--config", kConfig, "--bogus"}).rc, 2);
  const auto missing = cli({"simulate", "--config", "/nonexistent/config.json"});
  EXPECT_EQ(missing.rc, 1);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(cli({"simulate", "--config", kConfig, "--user", "nobody"}).rc, 1);
  EXPECT_EQ(cli({"--help"}).rc, 0);
}
