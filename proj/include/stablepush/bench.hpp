#pragma once

// Benchmark suites: (scene, goal, seeds) cases with pass expectations.
// Scene paths in a suite file are relative to the suite file.

#include "stablepush/planner.hpp"
#include "stablepush/scene_io.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

namespace stablepush {

struct BenchCase {
  std::string name;
  std::string scene_path;  // resolved
  GraspPose init;
  GraspPose goal;
  std::vector<std::uint64_t> seeds;
  double min_success_rate = 1.0;
  std::optional<int> max_switchovers;
  double time_budget = 60.0;  // s per seed
};

struct BenchSuite {
  std::string name;
  std::vector<BenchCase> cases;
};

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline BenchSuite suite_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  BenchSuite suite;
  try {
    suite.name = j.value("name", std::string("suite"));
    for (const auto& c : j.at("cases")) {
      BenchCase bc;
      bc.name = c.at("name").get<std::string>();
      const std::filesystem::path sp = c.at("scene").get<std::string>();
      bc.scene_path = (sp.is_absolute() ? sp : base_dir / sp).lexically_normal().string();
      auto pose = [&](const nlohmann::json& g, const char* what) {
        if (!g.is_array() || g.size() != 3) throw SuiteError(bc.name + ": " + what + " must be [x_mm, z_mm, theta_deg]");
        return GraspPose{g[0].get<double>(), g[1].get<double>(), deg_to_rad(g[2].get<double>())};
      };
      bc.goal = pose(c.at("goal"), "goal");
      if (c.contains("init")) bc.init = pose(c.at("init"), "init");
      bc.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
      if (bc.seeds.empty()) throw SuiteError(bc.name + ": needs at least one seed");
      if (c.contains("expect")) {
        const auto& e = c.at("expect");
        bc.min_success_rate = e.value("min_success_rate", 1.0);
        if (e.contains("max_switchovers")) bc.max_switchovers = e.at("max_switchovers").get<int>();
      }
      bc.time_budget = c.value("time_budget_s", 60.0);
      suite.cases.push_back(std::move(bc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SuiteError(std::string("malformed suite: ") + e.what());
  }
  return suite;
}

inline BenchSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::Io, "cannot open suite file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SuiteError(path + ": " + e.what());
  }
  return suite_from_json(j, std::filesystem::path(path).parent_path());
}

struct SeedResult {
  std::uint64_t seed = 0;
  bool plan_found = false;   // goal reached within the scene's switch-over threshold
  bool success = false;      // plan_found and within the case's switch-over bound
  int switchovers = -1;      // best goal-region count, -1 when none reached
  double final_error = 0.0;  // mm
  double wall_time = 0.0;
  int iterations = 0;
  std::size_t tree_size = 0;
  std::vector<std::pair<int, int>> history;
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct CaseReport {
  std::string name;
  std::string scene_hash;
  std::vector<SeedResult> seeds;
  double success_rate = 0.0;
  double median_time = 0.0;
  double p90_time = 0.0;
  double median_iterations = 0.0;
  int best_switchovers = -1;
  double median_final_error = 0.0;  // over successful seeds
  bool passed = false;
  std::string violation;
};

/// Plans one seed. Never throws for planner failures; those count as misses.
inline SeedResult run_seed(const PushModel& model, const BenchCase& c, std::uint64_t seed) {
  PlannerParams p = model.scene().planner;
  p.seed = seed;
  p.time_budget = c.time_budget;
  SeedResult r;
  r.seed = seed;
  Planner planner(model, c.init, c.goal, p);
  std::optional<PushPlan> plan;
  try {
    plan = planner.plan();
    r.plan_found = true;
  } catch (const IterationBudgetExhausted& e) {
    plan = e.best_plan();
  }
  const auto& st = planner.stats();
  r.wall_time = st.wall_time;
  r.iterations = st.iterations;
  r.tree_size = st.tree_size;
  r.history = st.best_switchover_history;
  if (plan) {
    r.switchovers = plan->total_switchovers;
    r.final_error = plan->final_pose_error;
  }
  r.success = r.plan_found && (!c.max_switchovers || r.switchovers <= *c.max_switchovers);
  return r;
}

inline void summarize(CaseReport& rep, const BenchCase& c) {
  std::vector<double> times, iters, errors;
  int ok = 0;
  for (const auto& r : rep.seeds) {
    times.push_back(r.wall_time);
    iters.push_back(r.iterations);
    if (r.success) {
      ++ok;
      errors.push_back(r.final_error);
    }
    if (r.switchovers >= 0 && (rep.best_switchovers < 0 || r.switchovers < rep.best_switchovers)) {
      rep.best_switchovers = r.switchovers;
    }
  }
  rep.success_rate = static_cast<double>(ok) / static_cast<double>(rep.seeds.size());
  rep.median_time = percentile(times, 0.5);
  rep.p90_time = percentile(times, 0.9);
  rep.median_iterations = percentile(iters, 0.5);
  rep.median_final_error = percentile(errors, 0.5);
  rep.passed = rep.success_rate + 1e-12 >= c.min_success_rate;
  if (!rep.passed) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "success rate %.2f below %.2f", rep.success_rate, c.min_success_rate);
    rep.violation = buf;
  }
}

/// Runs every (case, seed) pair on `jobs` worker threads. Report order
/// follows the suite regardless of scheduling.
inline std::vector<CaseReport> run_suite(const BenchSuite& suite, int jobs = 1) {
  std::vector<Scene> scenes;
  scenes.reserve(suite.cases.size());
  for (const auto& c : suite.cases) scenes.push_back(load_scene(c.scene_path));
  std::vector<std::unique_ptr<PushModel>> models;
  for (const auto& s : scenes) models.push_back(std::make_unique<PushModel>(s));

  std::vector<CaseReport> reports(suite.cases.size());
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t i = 0; i < suite.cases.size(); ++i) {
    reports[i].name = suite.cases[i].name;
    reports[i].scene_hash = scene_hash(scenes[i]);
    reports[i].seeds.resize(suite.cases[i].seeds.size());
    for (std::size_t k = 0; k < suite.cases[i].seeds.size(); ++k) work.emplace_back(i, k);
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t w = next.fetch_add(1);
      if (w >= work.size()) return;
      const auto [i, k] = work[w];
      try {
        reports[i].seeds[k] = run_seed(*models[i], suite.cases[i], suite.cases[i].seeds[k]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, jobs);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 0; i < suite.cases.size(); ++i) summarize(reports[i], suite.cases[i]);
  return reports;
}

inline nlohmann::json environment_fingerprint(int jobs) {
  nlohmann::json env;
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = std::string("gcc ") + __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
#ifdef NDEBUG
  env["build"] = "release";
#else
  env["build"] = "debug";
#endif
  env["hardware_threads"] = std::thread::hardware_concurrency();
  env["jobs"] = jobs;
  utsname u{};
  if (uname(&u) == 0) env["os"] = std::string(u.sysname) + " " + u.release + " " + u.machine;
  return env;
}

inline nlohmann::json bench_report_json(const BenchSuite& suite, const std::vector<CaseReport>& reports, int jobs) {
  nlohmann::json j;
  j["suite"] = suite.name;
  j["environment"] = environment_fingerprint(jobs);
  nlohmann::json cases = nlohmann::json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& c = suite.cases[i];
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : r.seeds) {
      nlohmann::json hist = nlohmann::json::array();
      for (const auto& [it, sw] : s.history) hist.push_back({it, sw});
      seeds.push_back({{"seed", s.seed},
                       {"success", s.success},
                       {"plan_found", s.plan_found},
                       {"switchovers", s.switchovers},
                       {"final_pose_error_mm", s.final_error},
                       {"wall_time_s", s.wall_time},
                       {"iterations", s.iterations},
                       {"tree_size", s.tree_size},
                       {"best_switchover_history", hist}});
    }
    nlohmann::json expect{{"min_success_rate", c.min_success_rate}};
    if (c.max_switchovers) expect["max_switchovers"] = *c.max_switchovers;
    cases.push_back({{"name", r.name},
                     {"scene", c.scene_path},
                     {"scene_hash", r.scene_hash},
                     {"init", {c.init.x, c.init.z, rad_to_deg(c.init.theta)}},
                     {"goal", {c.goal.x, c.goal.z, rad_to_deg(c.goal.theta)}},
                     {"expect", expect},
                     {"time_budget_s", c.time_budget},
                     {"success_rate", r.success_rate},
                     {"median_wall_time_s", r.median_time},
                     {"p90_wall_time_s", r.p90_time},
                     {"median_iterations", r.median_iterations},
                     {"best_switchovers", r.best_switchovers},
                     {"median_final_pose_error_mm", r.median_final_error},
                     {"passed", r.passed},
                     {"violation", r.violation},
                     {"seeds", seeds}});
  }
  j["cases"] = cases;
  return j;
}

inline std::string bench_report_table(const std::vector<CaseReport>& reports) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %8s %10s %10s %9s %8s %10s  %s\n", "case", "success", "median_s", "p90_s",
                "med_iter", "best_sw", "err_mm", "result");
  out += buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-22s %7.0f%% %10.3f %10.3f %9.0f %8d %10.3f  %s\n", r.name.c_str(),
                  100.0 * r.success_rate, r.median_time, r.p90_time, r.median_iterations, r.best_switchovers,
                  r.median_final_error, r.passed ? "ok" : ("FAIL: " + r.violation).c_str());
    out += buf;
  }
  return out;
}

}  // namespace stablepush
