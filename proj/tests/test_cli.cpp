// Exit-code and output contract of the `stablepush` executable.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef STABLEPUSH_CLI
#error "STABLEPUSH_CLI must name the executable under test"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string src(const std::string& rel) { return std::string(STABLEPUSH_SOURCE_DIR) + "/" + rel; }

Result run(const std::string& args) {
  const std::string cmd = std::string(STABLEPUSH_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stablepush_cli_" + std::to_string(getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kLowMu = src("scenes/square_prism_low_mu.json");
const std::string kTShape = src("scenes/t_shape.json");

}  // namespace

TEST_F(Cli, PlanWritesAPlanFile) {
  const auto r = run("plan --scene " + kLowMu + " --goal 20,0,0 --seed 1 --out " + tmp("p.json"));
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(slurp(tmp("p.json")));
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_EQ(j["seed"], 1);
  EXPECT_GE(j["segments"].size(), 2u);
  EXPECT_FALSE(j.contains("wall_time_s"));
}

TEST_F(Cli, PlanToGoalAtInitIsEmpty) {
  const auto r = run("plan --scene " + kLowMu + " --goal 0,0,0");
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["segments"].empty());
  EXPECT_EQ(j["total_switchovers"], 0);
}

TEST_F(Cli, PlanIsByteIdenticalForAFixedSeed) {
  ASSERT_EQ(run("plan --scene " + kTShape + " --goal 25,17.7,0 --seed 4 -o " + tmp("a.json")).code, 0);
  ASSERT_EQ(run("plan --scene " + kTShape + " --goal 25,17.7,0 --seed 4 -o " + tmp("b.json")).code, 0);
  EXPECT_EQ(slurp(tmp("a.json")), slurp(tmp("b.json")));
}

TEST_F(Cli, TimingFlagAddsWallTime) {
  ASSERT_EQ(run("plan --scene " + kTShape + " --goal 25,17.7,0 --timing -o " + tmp("a.json")).code, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(tmp("a.json"))).contains("wall_time_s"));
}

TEST_F(Cli, MissingSceneIsAnIoErrorWithoutOutput) {
  EXPECT_EQ(run("plan --scene " + tmp("none.json") + " --goal 1,0,0 -o " + tmp("p.json")).code, 3);
  EXPECT_FALSE(fs::exists(tmp("p.json")));
}

TEST_F(Cli, InvalidSceneIsAnInputError) {
  std::ofstream(tmp("bad.json")) << "{\"object\": 3}";
  EXPECT_EQ(run("check --scene " + tmp("bad.json") + " --twist 1,0,0 --pusher bottom").code, 4);
  std::ofstream(tmp("garbage.json")) << "{not json";
  EXPECT_EQ(run("plan --scene " + tmp("garbage.json") + " --goal 1,0,0").code, 4);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("plan --scene " + kLowMu).code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("check --scene " + kLowMu + " --twist 1,0,0 --pusher left --mode sideways").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, BudgetExhaustion) {
  EXPECT_EQ(run("plan --scene " + kLowMu + " --goal 20,0,0 --max-iterations 3 -o " + tmp("p.json")).code, 6);
  EXPECT_FALSE(fs::exists(tmp("p.json")));
}

TEST_F(Cli, CheckReproducesTheFrictionExample) {
  const auto lo = run("check --scene " + src("scenes/square_prism_mu02.json") + " --twist 10,0,0 --pusher bottom");
  EXPECT_EQ(lo.code, 1);
  EXPECT_EQ(lo.out.rfind("infeasible", 0), 0u);
  const auto hi = run("check --scene " + src("scenes/square_prism_mu06.json") + " --twist 10,0,0 --pusher bottom");
  EXPECT_EQ(hi.code, 0);
  EXPECT_EQ(hi.out.rfind("feasible (AllSlide)", 0), 0u);
}

TEST_F(Cli, CheckReproducesTheRollingExample) {
  const std::string scene = src("scenes/disc_rolling.json");
  const auto full = run("check --scene " + scene + " --twist 0,0,20 --pusher ground --json");
  EXPECT_EQ(full.code, 0);
  const auto j = nlohmann::json::parse(full.out);
  EXPECT_TRUE(j["feasible"]);
  EXPECT_EQ(j["case"], "StickSlide");
  EXPECT_EQ(j["pusher"], "ground");
  EXPECT_EQ(run("check --scene " + scene + " --twist 0,0,20 --pusher ground --mode all-slide").code, 1);
}

TEST_F(Cli, CheckRejectsZeroTwistAndUnknownPusher) {
  const std::string scene = src("scenes/square_prism_mu06.json");
  EXPECT_EQ(run("check --scene " + scene + " --twist 0,0,0 --pusher bottom").code, 2);
  EXPECT_EQ(run("check --scene " + scene + " --twist 10,0,0 --pusher nope").code, 5);
  EXPECT_EQ(run("check --scene " + scene + " --twist 10,0,0").code, 2);
}

TEST_F(Cli, CheckReverifiesAWrittenPlan) {
  ASSERT_EQ(run("plan --scene " + kTShape + " --goal 25,17.7,0 -o " + tmp("p.json")).code, 0);
  const auto ok = run("check --scene " + kTShape + " --plan " + tmp("p.json"));
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("verified"), std::string::npos);

  auto j = nlohmann::json::parse(slurp(tmp("p.json")));
  j["segments"][0]["steps"][0]["certificate"]["feasible"] = false;
  std::ofstream(tmp("tampered.json")) << j.dump(2);
  EXPECT_EQ(run("check --scene " + kTShape + " --plan " + tmp("tampered.json")).code, 1);

  EXPECT_EQ(run("check --scene " + kLowMu + " --plan " + tmp("p.json")).code, 8);
}

TEST_F(Cli, RenderWritesDeterministicFrames) {
  ASSERT_EQ(run("plan --scene " + kTShape + " --goal 25,17.7,0 -o " + tmp("p.json")).code, 0);
  ASSERT_EQ(run("render --scene " + kTShape + " --plan " + tmp("p.json") + " -o " + tmp("a")).code, 0);
  ASSERT_EQ(run("render --scene " + kTShape + " --plan " + tmp("p.json") + " -o " + tmp("b")).code, 0);
  int frames = 0;
  for (const auto& e : fs::directory_iterator(tmp("a"))) {
    ++frames;
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(tmp("b")) / e.path().filename()));
  }
  EXPECT_GE(frames, 2);
  EXPECT_EQ(run("render --scene " + kLowMu + " --plan " + tmp("p.json") + " -o " + tmp("c")).code, 8);
}

TEST_F(Cli, RenderOfEmptyPlanIsOneFrame) {
  ASSERT_EQ(run("plan --scene " + kLowMu + " --goal 0,0,0 -o " + tmp("p.json")).code, 0);
  ASSERT_EQ(run("render --scene " + kLowMu + " --plan " + tmp("p.json") + " -o " + tmp("f")).code, 0);
  EXPECT_EQ(std::distance(fs::directory_iterator(tmp("f")), fs::directory_iterator{}), 1);
}

TEST_F(Cli, BenchExitCodes) {
  std::ofstream(tmp("empty.json")) << R"({"cases": []})";
  EXPECT_EQ(run("bench --suite " + tmp("empty.json") + " -o " + tmp("r.json")).code, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(tmp("r.json")))["cases"].empty());

  nlohmann::json failing{{"cases",
                          {{{"name", "unreachable"},
                            {"scene", src("scenes/square_prism_pivot.json")},
                            {"goal", {0, 40, 0}},
                            {"seeds", {1}},
                            {"time_budget_s", 0.2}}}}};
  std::ofstream(tmp("fail.json")) << failing.dump();
  const auto r = run("bench --suite " + tmp("fail.json") + " -o " + tmp("r2.json"));
  EXPECT_EQ(r.code, 7);
  const auto rep = nlohmann::json::parse(slurp(tmp("r2.json")));
  EXPECT_EQ(rep["cases"][0]["success_rate"], 0.0);
  EXPECT_TRUE(rep["environment"].contains("compiler"));

  EXPECT_EQ(run("bench --suite " + tmp("missing.json")).code, 3);
}
