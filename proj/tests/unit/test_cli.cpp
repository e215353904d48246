#include "cli/commands.hpp"

#include "boundpath/mesh_io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace boundpath::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kSource(BOUNDPATH_SOURCE_DIR);

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("boundpath_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static int run(std::vector<std::string> args) {
    args.insert(args.begin(), "boundpath");
    return run_cli(args);
  }

  /// Runs the installed binary through the shell and returns its exit code.
  static int shell(const std::string& args) {
    const std::string cmd = std::string(BOUNDPATH_TOOL) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, HelpExitsZeroEverywhere) {
  EXPECT_EQ(shell("--help"), 0);
  EXPECT_EQ(shell("--version"), 0);
  for (const char* sub : {"convert", "generate", "query", "validate", "fuzz", "simulate", "bench", "replay"})
    EXPECT_EQ(shell(std::string(sub) + " --help"), 0) << sub;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(shell(""), 2);
  EXPECT_EQ(shell("frobnicate"), 2);
  EXPECT_EQ(shell("generate cube " + path("cube.json")), 0);
  EXPECT_EQ(shell("query " + path("cube.json") + " --point '0.5 zero 0.5'"), 2);
  EXPECT_EQ(shell("query " + path("cube.json") + " --point '0.5 0.5'"), 2);
  EXPECT_EQ(shell("query " + path("missing.json") + " --point '0 0 0'"), 2);
  EXPECT_EQ(shell("simulate " + path("no_such_scene.json")), 2);
  EXPECT_EQ(shell("fuzz --budget -1"), 2);
}

TEST_F(Cli, QueryCubeCenter) {
  ASSERT_EQ(run({"generate", "cube", path("cube.json")}), 0);
  ASSERT_EQ(run({"query", path("cube.json"), "--point", "0.5 0.5 0.5", "--out", path("q.json"), "--path-obj",
                 path("paths.obj"), "--trace", path("trace.txt")}),
            0);
  const auto j = nlohmann::json::parse(read_text_file(path("q.json")));
  ASSERT_EQ(j["results"].size(), 1u);
  EXPECT_NEAR(j["results"][0]["distance"].get<double>(), 0.5, 1e-12);
  const std::string obj = read_text_file(path("paths.obj"));
  EXPECT_NE(obj.find("l "), std::string::npos);
  EXPECT_FALSE(read_text_file(path("trace.txt")).empty());
}

TEST_F(Cli, NoCullingChangesStatsOnly) {
  const std::string mesh = (kSource / "data" / "corpus" / "folded_bar_a.json").string();
  std::vector<std::string> base{"query", mesh};
  for (const char* p : {"0.3 0.1 0.2", "1.0 -0.8 0.25", "-0.9 0.4 0.1", "0.2 1.1 0.3"}) {
    base.push_back("--point");
    base.push_back(p);
  }
  for (int v : {3, 40, 111}) {
    base.push_back("--vertex");
    base.push_back(std::to_string(v));
  }
  auto with = base;
  with.insert(with.end(), {"--out", path("on.json")});
  auto without = base;
  without.insert(without.end(), {"--no-culling", "--out", path("off.json")});
  ASSERT_EQ(run(with), 0);
  ASSERT_EQ(run(without), 0);
  auto on = nlohmann::json::parse(read_text_file(path("on.json")));
  auto off = nlohmann::json::parse(read_text_file(path("off.json")));
  ASSERT_EQ(on["results"].size(), off["results"].size());
  for (std::size_t i = 0; i < on["results"].size(); ++i) {
    auto a = on["results"][i];
    auto b = off["results"][i];
    a.erase("stats");
    b.erase("stats");
    EXPECT_EQ(a, b) << i;
  }
}

TEST_F(Cli, EnvironmentOverridesFlags) {
  ASSERT_EQ(run({"generate", "cube", path("cube.json")}), 0);
  ::setenv("BOUNDPATH_NO_CULLING", "1", 1);
  const int code = run({"query", path("cube.json"), "--point", "0.5 0.5 0.5", "--out", path("q.json")});
  ::unsetenv("BOUNDPATH_NO_CULLING");
  ASSERT_EQ(code, 0);
  const auto j = nlohmann::json::parse(read_text_file(path("q.json")));
  EXPECT_EQ(j["results"][0]["stats"]["culled"].get<int>(), 0);
}

TEST_F(Cli, ValidateBundledCorpus) {
  const std::string corpus = (kSource / "data" / "corpus").string();
  ASSERT_EQ(run({"validate", corpus, "--samples", "60", "--out", path("v1")}), 0);
  ASSERT_EQ(run({"validate", corpus, "--samples", "60", "--out", path("v2")}), 0);
  const auto r1 = read_text_file(path("v1") + "/report.json");
  EXPECT_EQ(r1, read_text_file(path("v2") + "/report.json"));
  EXPECT_EQ(nlohmann::json::parse(r1)["mismatches"].get<int>(), 0);
  EXPECT_TRUE(fs::exists(path("v1") + "/manifest.json"));
}

TEST_F(Cli, ValidateCatchesSkippedValidity) {
  const std::string mesh = (kSource / "data" / "corpus" / "folded_bar_a.json").string();
  EXPECT_EQ(run({"validate", mesh, "--samples", "100", "--inject", "skip-validity", "--out", path("v")}), 1);
  const auto report = nlohmann::json::parse(read_text_file(path("v") + "/report.json"));
  EXPECT_GT(report["mismatches"].get<int>(), 0);
  EXPECT_FALSE(fs::is_empty(path("v") + "/replays"));
}

TEST_F(Cli, FuzzZeroBudgetIsEmpty) {
  ASSERT_EQ(run({"fuzz", "--budget", "0", "--out", path("f")}), 0);
  EXPECT_TRUE(fs::is_empty(path("f") + "/corpus"));
  EXPECT_TRUE(fs::is_empty(path("f") + "/findings"));
}

TEST_F(Cli, FuzzIsDeterministicAndFindsTheZeroEpsilonRegression) {
  const std::vector<std::string> args{"fuzz", "--cases", "6", "--queries", "8", "--rays", "60"};
  auto a = args;
  a.insert(a.end(), {"--out", path("a")});
  auto b = args;
  b.insert(b.end(), {"--out", path("b")});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  for (int k = 0; k < 6; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "/corpus/case_%05d.json", k);
    EXPECT_EQ(read_text_file(path("a") + name), read_text_file(path("b") + name));
  }
  EXPECT_EQ(run({"fuzz", "--cases", "4", "--kinds", "threaded", "--rays", "300", "--eps-i", "0", "--out", path("z")}),
            1);
  EXPECT_FALSE(fs::is_empty(path("z") + "/findings"));
}

TEST_F(Cli, SimulateAndReplayAreByteIdentical) {
  const std::string scene = (kSource / "data" / "scenes" / "two_blocks.json").string();
  ASSERT_EQ(run({"simulate", scene, "--frames", "3", "--out", path("s1")}), 0);
  ASSERT_EQ(run({"replay", path("s1") + "/manifest.json", "--out", path("s2")}), 0);
  for (const char* f : {"/summary.json", "/contacts.jsonl", "/frames/frame_0003.json", "/manifest.json"}) {
    if (std::string(f) == "/manifest.json") continue;  // records its own output directory
    EXPECT_EQ(read_text_file(path("s1") + f), read_text_file(path("s2") + f)) << f;
  }
}

TEST_F(Cli, BenchCsvIsDeterministic) {
  const std::string mesh = (kSource / "data" / "corpus" / "folded_bar_b.json").string();
  ASSERT_EQ(run({"bench", mesh, "--count", "40", "--out", path("a.csv")}), 0);
  ASSERT_EQ(run({"bench", mesh, "--count", "40", "--out", path("b.csv")}), 0);
  const std::string csv = read_text_file(path("a.csv"));
  EXPECT_EQ(csv, read_text_file(path("b.csv")));
  EXPECT_EQ(csv.rfind("culling,queries", 0), 0u);
}

TEST_F(Cli, ConvertRoundTrip) {
  ASSERT_EQ(run({"generate", "tet-grid", path("g.json"), "--nx", "2", "--ny", "2", "--nz", "2"}), 0);
  ASSERT_EQ(run({"convert", path("g.json"), path("g2.json")}), 0);
  ASSERT_EQ(run({"convert", path("g.json"), path("g.obj")}), 0);
  EXPECT_EQ(read_text_file(path("g.json")), read_text_file(path("g2.json")));
  EXPECT_FALSE(read_text_file(path("g.obj")).empty());
}

}  // namespace
}  // namespace boundpath::cli
