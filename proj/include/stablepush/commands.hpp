#pragma once

// Command implementations behind the `stablepush` executable. Each returns a
// process exit code and writes only to the given streams and output paths.

#include "stablepush/bench.hpp"
#include "stablepush/plan_io.hpp"
#include "stablepush/render.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>

namespace stablepush {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int infeasible = 1;  // check: not a stable push, or plan re-verification mismatch
inline constexpr int usage = 2;
inline constexpr int io = 3;
inline constexpr int invalid_input = 4;  // malformed or invalid scene, plan, or suite
inline constexpr int unknown_pusher = 5;
inline constexpr int budget_exhausted = 6;
inline constexpr int bench_failed = 7;
inline constexpr int hash_mismatch = 8;
}  // namespace exit_code

/// Pose given on the command line as x mm, z mm, theta deg.
inline GraspPose pose_from_cli(const std::vector<double>& v) {
  if (v.size() != 3) throw std::invalid_argument("pose needs exactly 3 numbers: x_mm z_mm theta_deg");
  return {v[0], v[1], deg_to_rad(v[2])};
}

/// Maps library exceptions to exit codes. `body` returns the success code.
template <class F>
int run_guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const SceneError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == SceneError::Kind::Io ? exit_code::io : exit_code::invalid_input;
  } catch (const PlanFormatError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::invalid_input;
  } catch (const SuiteError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::invalid_input;
  } catch (const UnknownPusher& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::unknown_pusher;
  } catch (const IterationBudgetExhausted& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::budget_exhausted;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::io;
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SceneError(SceneError::Kind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw SceneError(SceneError::Kind::Io, "write failed for '" + path + "'");
}

struct PlanArgs {
  std::string scene;
  std::vector<double> goal;
  std::vector<double> init{0.0, 0.0, 0.0};
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iterations;
  std::optional<double> time_budget;
  std::string out;  // empty: stdout
  bool timing = false;
};

inline int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const Scene scene = load_scene(a.scene);
    const PushModel model(scene);
    PlannerParams p = scene.planner;
    if (a.seed) p.seed = *a.seed;
    if (a.max_iterations) p.max_iterations = *a.max_iterations;
    if (a.time_budget) p.time_budget = *a.time_budget;
    Planner planner(model, pose_from_cli(a.init), pose_from_cli(a.goal), p);
    try {
      const PushPlan plan = planner.plan();
      PlanMetadata meta{scene_hash(scene), p.seed, planner.stats().iterations, planner.stats().tree_size, std::nullopt};
      if (a.timing) meta.wall_time = planner.stats().wall_time;
      const std::string text = plan_to_json(plan, meta).dump(2) + "\n";
      if (a.out.empty()) {
        out << text;
      } else {
        write_text_file(a.out, text);
      }
      std::ostream& log = a.out.empty() ? err : out;
      log << "plan: " << plan.segments.size() << " segments, " << plan.total_switchovers << " switch-overs, final error "
          << std::setprecision(4) << plan.final_pose_error << " mm, " << planner.stats().iterations << " iterations\n";
      return exit_code::ok;
    } catch (const IterationBudgetExhausted& e) {
      err << "error: " << e.what() << "; closest approach " << e.stats().closest_distance << " mm";
      if (e.best_plan()) err << "; best goal-region plan has " << e.best_plan()->total_switchovers << " switch-overs";
      err << '\n';
      return exit_code::budget_exhausted;
    }
  });
}

struct CheckArgs {
  std::string scene;
  std::vector<double> pose{0.0, 0.0, 0.0};
  std::vector<double> twist;  // mm/s, mm/s, deg/s
  std::string pusher;
  std::string mode = "auto";  // auto | all-slide
  std::string plan;           // re-verify a plan file instead of one step
  bool json = false;
};

inline nlohmann::json certificate_report(const FeasibilityCertificate& c, const Scene& s) {
  auto j = plan_json::certificate(c);
  j["pusher"] = c.pusher >= 0 ? s.pushers[static_cast<std::size_t>(c.pusher)].id : "";
  return j;
}

inline int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const Scene scene = load_scene(a.scene);
    const PushModel model(scene);

    if (!a.plan.empty()) {
      const auto loaded = load_plan(a.plan);
      const std::string hash = scene_hash(scene);
      if (loaded.meta.scene_hash != hash) {
        err << "error: plan was made for scene " << loaded.meta.scene_hash << ", this scene is " << hash << '\n';
        return exit_code::hash_mismatch;
      }
      const auto r = reverify_plan(model, loaded.plan);
      if (a.json) {
        out << nlohmann::json{{"steps", r.steps}, {"mismatches", r.mismatches}, {"messages", r.messages}}.dump(2) << '\n';
      } else {
        for (const auto& m : r.messages) out << m << '\n';
        out << (r.ok() ? "verified" : "MISMATCH") << ": " << r.steps << " steps, " << r.mismatches << " mismatches\n";
      }
      return r.ok() ? exit_code::ok : exit_code::infeasible;
    }

    if (a.twist.size() != 3) throw std::invalid_argument("--twist needs vx_mm_s vz_mm_s omega_deg_s");
    if (a.pusher.empty()) throw std::invalid_argument("--pusher is required");
    CheckOptions opt;
    if (a.mode == "all-slide") {
      opt.force_case = PushCase::AllSlide;
    } else if (a.mode != "auto") {
      throw std::invalid_argument("--mode must be auto or all-slide");
    }
    const ObjectTwist tw{a.twist[0] * 1e-3, a.twist[1] * 1e-3, deg_to_rad(a.twist[2])};
    if (tw.is_zero()) throw std::invalid_argument("twist must be nonzero");
    const auto c = check_stable_push(model, pose_from_cli(a.pose), tw, a.pusher, opt);
    if (a.json) {
      out << certificate_report(c, scene).dump(2) << '\n';
    } else {
      out << std::setprecision(6);
      out << (c.feasible ? "feasible" : "infeasible") << " (" << to_string(c.push_case) << ")\n";
      out << "margin " << c.margin << "  residual " << c.residual << '\n';
      out << "motion wrench [N*s, N*s, N*m*s]: " << c.motion_wrench.transpose() << '\n';
      if (c.feasible) {
        out << "witness: " << c.witness.transpose() << '\n';
        for (std::size_t i = 0; i < c.pusher_impulses.size(); ++i) {
          out << "  pusher point " << i << ": p_n " << c.pusher_impulses[i].x() << "  p_t " << c.pusher_impulses[i].y()
              << '\n';
        }
      }
    }
    return c.feasible ? exit_code::ok : exit_code::infeasible;
  });
}

struct BenchArgs {
  std::string suite;
  std::string out;  // JSON report path; empty: none
  int jobs = 1;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const BenchSuite suite = load_suite(a.suite);
    const auto reports = run_suite(suite, a.jobs);
    if (!a.out.empty()) write_text_file(a.out, bench_report_json(suite, reports, a.jobs).dump(2) + "\n");
    out << bench_report_table(reports);
    const bool all = std::all_of(reports.begin(), reports.end(), [](const CaseReport& r) { return r.passed; });
    return all ? exit_code::ok : exit_code::bench_failed;
  });
}

struct RenderArgs {
  std::string scene;
  std::string plan;
  std::string out_dir;
  int stride = 5;
};

inline int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&] {
    const Scene scene = load_scene(a.scene);
    const auto loaded = load_plan(a.plan);
    const std::string hash = scene_hash(scene);
    if (loaded.meta.scene_hash != hash) {
      err << "error: plan was made for scene " << loaded.meta.scene_hash << ", this scene is " << hash << '\n';
      return exit_code::hash_mismatch;
    }
    RenderOptions opt;
    opt.stride = a.stride;
    const auto frames = render_plan(scene, loaded.plan, opt);
    std::filesystem::create_directories(a.out_dir);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.svg", i);
      write_text_file((std::filesystem::path(a.out_dir) / name).string(), frames[i]);
    }
    out << "wrote " << frames.size() << " frames to " << a.out_dir << '\n';
    return exit_code::ok;
  });
}

}  // namespace stablepush
