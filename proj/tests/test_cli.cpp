#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "femgraph/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "femgraph");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = femgraph::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Last stderr line, which carries the JSON error object on failure.
nlohmann::json error_line(const std::string& err) {
  std::istringstream in(err);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '{') last = line;
  }
  return nlohmann::json::parse(last);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("femgraph-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "-" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MeshSolveRenderChainIsDeterministic) {
  ASSERT_EQ(run_cli({"gen-design", "--family", "2", "--seed", "5", "--out", path("d.json")}).code, 0);
  ASSERT_EQ(run_cli({"mesh", "--design", path("d.json"), "--size", "1.5", "--out", path("m.txt")}).code, 0);
  const Result solved = run_cli({"solve", "--mesh", path("m.txt"), "--load", "1000", "--angle", "4.712", "--out", path("s.txt")});
  ASSERT_EQ(solved.code, 0) << solved.err;
  const auto log = nlohmann::json::parse(solved.err.substr(0, solved.err.find('\n')));
  EXPECT_EQ(log["event"], "config");
  EXPECT_EQ(log["command"], "solve");
  EXPECT_TRUE(log["config"].contains("youngs_modulus") || log["config"].contains("material"));

  const Result a = run_cli({"render", "--mesh", path("m.txt"), "--solution", path("s.txt")});
  const Result b = run_cli({"render", "--mesh", path("m.txt"), "--solution", path("s.txt")});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("<svg"), std::string::npos);

  ASSERT_EQ(run_cli({"solve", "--mesh", path("m.txt"), "--load", "1000", "--angle", "4.712", "--out", path("s2.txt")}).code, 0);
  EXPECT_EQ(slurp(path("s.txt")), slurp(path("s2.txt")));
}

TEST_F(CliTest, EmbedProducesOneGraphLine) {
  ASSERT_EQ(run_cli({"mesh", "--family", "1", "--seed", "3", "--size", "2", "--out", path("m.txt")}).code, 0);
  ASSERT_EQ(run_cli({"solve", "--mesh", path("m.txt"), "--out", path("s.txt")}).code, 0);
  const Result r = run_cli({"embed", "--mesh", path("m.txt"), "--solution", path("s.txt"), "--id", "x1", "--family", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find('\n'), r.out.size() - 1);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["id"], "x1");
  EXPECT_EQ(j["features"][0].size(), 18u);
  EXPECT_EQ(j["num_vertices"], j["target"].size());

  const Result conv = run_cli({"embed", "--mesh", path("m.txt"), "--solution", path("s.txt"), "--mode", "conventional"});
  ASSERT_EQ(conv.code, 0);
  EXPECT_LT(nlohmann::json::parse(conv.out)["edges"].size(), j["edges"].size());
}

TEST_F(CliTest, OptimizeWritesDensities) {
  ASSERT_EQ(run_cli({"mesh", "--family", "1", "--seed", "4", "--size", "2", "--out", path("m.txt")}).code, 0);
  const Result r = run_cli({"optimize", "--mesh", path("m.txt"), "--set", "max_cycles=5", "--out", path("z.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(path("z.txt")));
  long m = 0, h = 0, cycles = 0;
  in >> m >> h >> cycles;
  EXPECT_GT(m, 0);
  EXPECT_LE(cycles, 5);
  EXPECT_EQ(h, cycles + 1);
}

TEST_F(CliTest, MetricsOnIdenticalFilesAreZero) {
  write(path("a.txt"), "1 2 3\n4.5\n");
  const Result r = run_cli({"metrics", "--pred", path("a.txt"), "--truth", path("a.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["mse"], 0.0);
  EXPECT_EQ(j["mape"], 0.0);
  EXPECT_EQ(j["count"], 4);

  write(path("b.txt"), "1 2\n");
  const Result bad = run_cli({"metrics", "--pred", path("a.txt"), "--truth", path("b.txt")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(error_line(bad.err)["error"], "data");
}

TEST_F(CliTest, DatasetCommandWritesSplitsAndManifest) {
  const Result r = run_cli({"dataset", "--families", "1,2", "--per-family", "2", "--size", "2", "--seed", "9",
                            "--out", path("ds")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["samples"], 4);
  for (const char* f : {"samples_train.jsonl", "samples_val.jsonl", "samples_test.jsonl", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "ds" / f)) << f;
  }
  const auto m = nlohmann::json::parse(slurp(dir_ / "ds" / "manifest.json"));
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["records"].size(), 4u);
}

TEST_F(CliTest, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"gen-design", "--family", "12"}).code, 2);
  const Result unknown = run_cli({"gen-design", "--set", "colour=red"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_EQ(error_line(unknown.err)["error"], "config");
  EXPECT_EQ(run_cli({"gen-design", "--set", "noequals"}).code, 2);
  write(path("bad.cfg"), "per_family = lots\n");
  EXPECT_EQ(run_cli({"dataset", "--config", path("bad.cfg"), "--out", path("ds")}).code, 2);
  EXPECT_EQ(run_cli({"dataset", "--families", "0..3", "--out", path("ds")}).code, 2);
}

TEST_F(CliTest, PipelineErrorsExitOne) {
  write(path("broken.mesh"), "3 1 0\n0 0\n1 0\n");
  const Result r = run_cli({"solve", "--mesh", path("broken.mesh")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r.err)["error"], "data");

  write(path("d.json"), R"({"family": 2, "width": 10})");
  EXPECT_EQ(run_cli({"mesh", "--design", path("d.json")}).code, 1);
}

TEST_F(CliTest, ConfigFileAndOverridesResolveInOrder) {
  write(path("c.cfg"), "seed = 4\nwidth = 30 30 0.1\n");
  const Result a = run_cli({"gen-design", "--config", path("c.cfg")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(nlohmann::json::parse(a.out)["width"], 30.0);
  const Result b = run_cli({"gen-design", "--config", path("c.cfg"), "--set", "width=25 25 0.1"});
  EXPECT_EQ(nlohmann::json::parse(b.out)["width"], 25.0);
  const Result c = run_cli({"gen-design", "--config", path("c.cfg"), "--seed", "4"});
  EXPECT_EQ(a.out, c.out);
  const Result d = run_cli({"gen-design", "--config", path("c.cfg"), "--seed", "5"});
  EXPECT_NE(a.out, d.out);
}

TEST_F(CliTest, InstalledBinaryReportsExitCodes) {
  const std::string bin = FEMGRAPH_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " gen-design --family 3 --seed 7 > " + path("o.json") + " 2>/dev/null"), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("o.json")))["family"], 3);
  EXPECT_EQ(status(bin + " gen-design --family 99 >/dev/null 2>&1"), 2);
  EXPECT_EQ(status(bin + " solve --mesh /nonexistent >/dev/null 2>&1"), 2);
}
