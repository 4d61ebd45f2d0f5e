#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oscar/cli.hpp"

using namespace oscar;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run oscar_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("oscar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& content) const { std::ofstream(dir / name) << content; }

  // A small synthetic corpus written through the CLI.
  std::string corpus(int sessions = 3) const {
    const auto out = path("corpus");
    const auto r = oscar_cli({"--seed", "3", "simulate", "--out", out, "--sessions", std::to_string(sessions),
                              "--steps", "4", "--frames-per-step", "10"});
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, ParseWritesValidRecipe) {
  write("recipe.txt", "Step 1: Chop onions.\n2. Heat oil.\n");
  const auto r = oscar_cli({"parse", path("recipe.txt"), "-o", path("recipe.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = read_json(path("recipe.json"));
  EXPECT_TRUE(validate(doc, schema::kRecipe).empty());
  EXPECT_EQ(doc["steps"], json({"Chop onions.", "Heat oil."}));
}

TEST_F(CliTest, ExtractStatusToStdout) {
  write("recipe.txt", "Ingredients:\n- eggs\nSteps:\n1. Whisk the eggs in a bowl\n2. Wait 10 minutes\n");
  ASSERT_EQ(oscar_cli({"parse", path("recipe.txt"), "-o", path("recipe.json")}).code, 0);
  const auto r = oscar_cli({"extract-status", path("recipe.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse_document(r.out);
  EXPECT_TRUE(validate(doc, schema::kStatusMap).empty());
  EXPECT_EQ(doc["1"], json::parse(R"([{"noun":"eggs","verb":"whisking"}])"));
  EXPECT_EQ(doc["2"], json::array());
}

TEST_F(CliTest, UsageErrorsExitTwoWithHelp) {
  auto r = oscar_cli({});
  EXPECT_EQ(r.code, 2);
  r = oscar_cli({"eval"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--corpus"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  r = oscar_cli({"--provider", "gpt", "parse", "x"});
  EXPECT_EQ(r.code, 2);
  r = oscar_cli({"eval", "--corpus", "x", "--mode", "fused"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, HelpExitsZero) {
  const auto r = oscar_cli({"query", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("is_done"), std::string::npos);
}

TEST_F(CliTest, DomainErrorsExitOne) {
  write("empty.txt", "");
  auto r = oscar_cli({"parse", path("empty.txt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("EmptyInput"), std::string::npos);
  r = oscar_cli({"eval", "--corpus", path("missing")});
  EXPECT_EQ(r.code, 1);
  r = oscar_cli({"eval", "--corpus", corpus(), "--w", "2"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, QueryGapExample) {
  Recipe recipe;
  for (int i = 1; i <= 5; ++i) recipe.steps.push_back("Step " + std::to_string(i));
  SessionState s(recipe);
  observe(s, std::vector<double>{0.9, 0.1, 0.1, 0.1, 0.1}, Mode::Oscar);
  observe(s, std::vector<double>{0.1, 0.1, 0.9, 0.1, 0.1}, Mode::Oscar);
  write_json(path("session.json"), to_document(make_log("gap", Mode::Oscar, s)));
  auto r = oscar_cli({"query", "--log", path("session.json"), "--q", "is_done:2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "false\n");
  r = oscar_cli({"--json", "query", "--log", path("session.json"), "--q", "missing"});
  ASSERT_EQ(r.code, 0);
  const auto doc = parse_document(r.out);
  EXPECT_TRUE(validate(doc, schema::kQueryAnswer).empty());
  EXPECT_EQ(doc["answer"], json({2}));
  r = oscar_cli({"query", "--log", path("session.json"), "--q", "is_done:7"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("UnknownStep"), std::string::npos);
}

TEST_F(CliTest, EvalPrintsTableShapedReport) {
  const auto c = corpus();
  const auto r = oscar_cli({"--seed", "0", "--provider", "mock", "eval", "--corpus", c, "--mode", "both"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* col : {"Model", "Baseline Accuracy", "Baseline SD", "OSCAR Accuracy", "OSCAR SD",
                          "Delta Accuracy (OSCAR - Baseline)", "sim-0002"})
    EXPECT_NE(r.out.find(col), std::string::npos) << col;
}

TEST_F(CliTest, EvalJsonCsvAndLogsValidate) {
  const auto c = corpus();
  auto r = oscar_cli({"--provider", "oracle", "--json", "eval", "--corpus", c, "--log-dir", path("logs"), "--out",
                      path("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse_document(r.out);
  EXPECT_EQ(describe(validate(doc, schema::kReport)), "");
  EXPECT_EQ(read_text(path("report.json")), r.out);
  int logs = 0;
  for (const auto& e : fs::directory_iterator(path("logs"))) {
    ++logs;
    EXPECT_EQ(describe(validate(read_json(e.path()), schema::kHistoryLog)), "") << e.path();
  }
  EXPECT_EQ(logs, 3 * 2 * 3);
  r = oscar_cli({"--provider", "oracle", "eval", "--corpus", c, "--csv", "--mode", "oscar"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("model,video_id,step,baseline,oscar\n", 0), 0u);
}

TEST_F(CliTest, EvalIsByteIdenticalAcrossRunsAndJobCounts) {
  const auto c = corpus(4);
  ASSERT_EQ(oscar_cli({"--provider", "mock", "--jobs", "1", "eval", "--corpus", c, "--out", path("a.json"),
                       "--log-dir", path("la")}).code, 0);
  ASSERT_EQ(oscar_cli({"--provider", "mock", "--jobs", "3", "eval", "--corpus", c, "--out", path("b.json"),
                       "--log-dir", path("lb")}).code, 0);
  EXPECT_EQ(read_text(path("a.json")), read_text(path("b.json")));
  for (const auto& e : fs::directory_iterator(path("la")))
    EXPECT_EQ(read_text(e.path()), read_text(fs::path(path("lb")) / e.path().filename()));
}

TEST_F(CliTest, AlignAndTrackOnSyntheticSession) {
  const auto session = fs::path(corpus(1)) / "sim-0000";
  auto r = oscar_cli({"--provider", "oracle", "align", "--recipe", (session / "recipe.json").string(), "--statuses",
                      (session / "statuses.json").string(), "--manifest", (session / "manifest.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(describe(validate(parse_document(r.out), schema::kFrameScores)), "");

  r = oscar_cli({"--provider", "oracle", "track", "--recipe", (session / "recipe.json").string(), "--manifest",
                 (session / "manifest.json").string(), "--batch", "5", "--log", path("track.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("#8 frames 35..39"), std::string::npos) << r.out;
  const auto log = read_json(path("track.json"));
  EXPECT_EQ(describe(validate(log, schema::kHistoryLog)), "");
  EXPECT_EQ(log["entries"].size(), 8u);
  r = oscar_cli({"query", "--log", path("track.json"), "--q", "current"});
  EXPECT_EQ(r.out, "4\n");
}

TEST_F(CliTest, SimulateSweepTable) {
  const auto r = oscar_cli({"--json", "simulate", "--sessions", "4", "--steps", "4", "--frames-per-step", "10",
                            "--sweep", "clutter=0,1", "--out", path("sweep.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse_document(r.out);
  EXPECT_EQ(describe(validate(doc, schema::kSweep)), "");
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(oscar_cli({"simulate", "--sweep", "bogus=1"}).code, 1);
}

TEST_F(CliTest, ConfigPrecedenceFlagsThenFileThenEnv) {
  const auto c = corpus(1);
  write("oscar.toml", "seed = 5\nurl = \"http://127.0.0.1:2\"\n");
  auto r = oscar_cli({"--config", path("oscar.toml"), "--json", "--provider", "mock", "eval", "--corpus", c});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_document(r.out)["seed"], 5);
  r = oscar_cli({"--config", path("oscar.toml"), "--seed", "7", "--json", "--provider", "mock", "eval", "--corpus", c});
  EXPECT_EQ(parse_document(r.out)["seed"], 7);

  ::setenv(kProviderUrlEnv, "http://127.0.0.1:3", 1);
  r = oscar_cli({"--provider", "remote", "eval", "--corpus", c});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("127.0.0.1:3"), std::string::npos) << r.err;
  r = oscar_cli({"--config", path("oscar.toml"), "--provider", "remote", "eval", "--corpus", c});
  EXPECT_NE(r.err.find("127.0.0.1:2"), std::string::npos) << r.err;
  r = oscar_cli({"--config", path("oscar.toml"), "--url", "http://127.0.0.1:4", "--provider", "remote", "eval",
                 "--corpus", c});
  EXPECT_NE(r.err.find("127.0.0.1:4"), std::string::npos) << r.err;
  ::unsetenv(kProviderUrlEnv);
}
