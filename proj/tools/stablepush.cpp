#include "stablepush/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace stablepush;

int main(int argc, char** argv) {
  CLI::App app{"In-hand regrasp planning with stable prehensile pushes"};
  app.require_subcommand(1);

  PlanArgs plan;
  std::uint64_t seed = 0;
  int max_iterations = 0;
  double time_budget = 0.0;
  auto* p = app.add_subcommand("plan", "Plan a regrasp from init to goal");
  p->add_option("--scene", plan.scene, "Scene file")->required();
  p->add_option("--goal", plan.goal, "Goal pose: x_mm z_mm theta_deg")->required()->expected(3)->delimiter(',');
  p->add_option("--init", plan.init, "Initial pose: x_mm z_mm theta_deg")->expected(3)->delimiter(',');
  auto* seed_opt = p->add_option("--seed", seed, "RNG seed (default: scene planner.seed)");
  auto* iter_opt = p->add_option("--max-iterations", max_iterations, "Iteration budget")->check(CLI::PositiveNumber);
  auto* time_opt = p->add_option("--time-budget", time_budget, "Wall-clock budget in s, 0 disables")->check(CLI::NonNegativeNumber);
  p->add_option("-o,--out", plan.out, "Plan output file (default: stdout)");
  p->add_flag("--timing", plan.timing, "Include wall time in the plan file");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Check one step, or re-verify a plan file");
  c->add_option("--scene", check.scene, "Scene file")->required();
  c->add_option("--pose", check.pose, "Grasp pose: x_mm z_mm theta_deg")->expected(3)->delimiter(',');
  c->add_option("--twist", check.twist, "Object twist: vx_mm_s vz_mm_s omega_deg_s")->expected(3)->delimiter(',');
  c->add_option("--pusher", check.pusher, "Pusher id");
  c->add_option("--mode", check.mode, "auto or all-slide")->check(CLI::IsMember({"auto", "all-slide"}));
  c->add_option("--plan", check.plan, "Plan file to re-verify");
  c->add_flag("--json", check.json, "Print the certificate as JSON");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a benchmark suite");
  b->add_option("--suite", bench.suite, "Suite file")->required();
  b->add_option("-o,--out", bench.out, "JSON report file");
  b->add_option("-j,--jobs", bench.jobs, "Worker threads")->check(CLI::PositiveNumber);

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Write SVG keyframes of a plan");
  r->add_option("--scene", render.scene, "Scene file")->required();
  r->add_option("--plan", render.plan, "Plan file")->required();
  r->add_option("-o,--out", render.out_dir, "Output directory")->required();
  r->add_option("--stride", render.stride, "Unit steps between frames")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  if (p->parsed()) {
    if (seed_opt->count()) plan.seed = seed;
    if (iter_opt->count()) plan.max_iterations = max_iterations;
    if (time_opt->count()) plan.time_budget = time_budget;
    return cmd_plan(plan, std::cout, std::cerr);
  }
  if (c->parsed()) return cmd_check(check, std::cout, std::cerr);
  if (b->parsed()) return cmd_bench(bench, std::cout, std::cerr);
  return cmd_render(render, std::cout, std::cerr);
}
