#pragma once

// Plan files: JSON documents carrying every unit step with its certificate.
//
// Poses are stored as {"x": mm, "z": mm, "theta": rad} and twists as SI
// (m/s, m/s, rad/s) so that a reloaded plan re-verifies bit for bit.
// Serialization is deterministic: no wall-clock data unless requested.

#include "stablepush/planner.hpp"
#include "stablepush/scene_io.hpp"

#include <fstream>
#include <optional>
#include <string>

namespace stablepush {

inline constexpr int kPlanFormatVersion = 1;

class PlanFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace plan_json {

using nlohmann::json;

inline json pose(const GraspPose& q) { return json{{"x", q.x}, {"z", q.z}, {"theta", q.theta}}; }
inline json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }
inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json certificate(const FeasibilityCertificate& c) {
  json j{{"feasible", c.feasible},
         {"case", to_string(c.push_case)},
         {"margin", c.margin},
         {"residual", c.residual},
         {"motion_wrench", vec(c.motion_wrench)},
         {"witness", vec(c.witness)}};
  json pi = json::array();
  for (const auto& p : c.pusher_impulses) pi.push_back(vec(p));
  j["pusher_impulses"] = pi;
  j["sticking_points"] = c.sticking_points;
  json si = json::array();
  for (const auto& p : c.sticking_impulses) si.push_back(vec(p));
  j["sticking_impulses"] = si;
  return j;
}

inline GraspPose read_pose(const json& j) {
  return {j.at("x").get<double>(), j.at("z").get<double>(), j.at("theta").get<double>()};
}

template <int N>
Eigen::Matrix<double, N, 1> read_vec(const json& j) {
  if (!j.is_array() || j.size() != N) throw PlanFormatError("expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

inline FeasibilityCertificate read_certificate(const json& j) {
  FeasibilityCertificate c;
  c.feasible = j.at("feasible").get<bool>();
  const auto kase = j.at("case").get<std::string>();
  if (kase != "AllSlide" && kase != "StickSlide") throw PlanFormatError("unknown certificate case '" + kase + "'");
  c.push_case = kase == "AllSlide" ? PushCase::AllSlide : PushCase::StickSlide;
  c.margin = j.at("margin").get<double>();
  c.residual = j.at("residual").get<double>();
  c.motion_wrench = read_vec<3>(j.at("motion_wrench"));
  c.witness = read_vec<3>(j.at("witness"));
  for (const auto& p : j.at("pusher_impulses")) c.pusher_impulses.push_back(read_vec<2>(p));
  c.sticking_points = j.at("sticking_points").get<std::vector<int>>();
  for (const auto& p : j.at("sticking_impulses")) c.sticking_impulses.push_back(read_vec<2>(p));
  return c;
}

}  // namespace plan_json

/// Run metadata written next to a plan.
struct PlanMetadata {
  std::string scene_hash;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::size_t tree_size = 0;
  std::optional<double> wall_time;
};

inline nlohmann::json plan_to_json(const PushPlan& plan, const PlanMetadata& meta) {
  using namespace plan_json;
  json j;
  j["format_version"] = kPlanFormatVersion;
  j["scene_hash"] = meta.scene_hash;
  j["seed"] = meta.seed;
  j["iterations"] = meta.iterations;
  j["tree_size"] = meta.tree_size;
  if (meta.wall_time) j["wall_time_s"] = *meta.wall_time;
  j["units"] = {{"pose", "mm, mm, rad"}, {"twist", "m/s, m/s, rad/s"}, {"wrench", "N*s, N*s, N*m*s"}};
  j["init"] = pose(plan.init);
  j["goal"] = pose(plan.goal);
  j["total_switchovers"] = plan.total_switchovers;
  j["final_pose_error_mm"] = plan.final_pose_error;
  json segs = json::array();
  for (const auto& s : plan.segments) {
    json wp = json::array();
    for (const auto& q : s.waypoints) wp.push_back(pose(q));
    json steps = json::array();
    for (const auto& st : s.steps) {
      steps.push_back({{"twist", json::array({st.twist.vx, st.twist.vz, st.twist.omega})},
                       {"certificate", certificate(st.certificate)}});
    }
    segs.push_back({{"pusher", s.pusher}, {"waypoints", wp}, {"steps", steps}});
  }
  j["segments"] = segs;
  return j;
}

struct LoadedPlan {
  PushPlan plan;
  PlanMetadata meta;
};

inline LoadedPlan plan_from_json(const nlohmann::json& j) {
  using namespace plan_json;
  try {
    if (j.at("format_version").get<int>() != kPlanFormatVersion) {
      throw PlanFormatError("unsupported plan format_version");
    }
    LoadedPlan out;
    out.meta.scene_hash = j.at("scene_hash").get<std::string>();
    out.meta.seed = j.at("seed").get<std::uint64_t>();
    out.meta.iterations = j.at("iterations").get<int>();
    out.meta.tree_size = j.at("tree_size").get<std::size_t>();
    if (j.contains("wall_time_s")) out.meta.wall_time = j.at("wall_time_s").get<double>();
    out.plan.init = read_pose(j.at("init"));
    out.plan.goal = read_pose(j.at("goal"));
    out.plan.total_switchovers = j.at("total_switchovers").get<int>();
    out.plan.final_pose_error = j.at("final_pose_error_mm").get<double>();
    for (const auto& sj : j.at("segments")) {
      PlanSegment s;
      s.pusher = sj.at("pusher").get<std::string>();
      for (const auto& w : sj.at("waypoints")) s.waypoints.push_back(read_pose(w));
      for (const auto& st : sj.at("steps")) {
        const auto tw = read_vec<3>(st.at("twist"));
        s.steps.push_back({{tw.x(), tw.y(), tw.z()}, read_certificate(st.at("certificate"))});
      }
      if (s.waypoints.size() != s.steps.size() + 1) {
        throw PlanFormatError("segment needs exactly one more waypoint than steps");
      }
      out.plan.segments.push_back(std::move(s));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw PlanFormatError(std::string("malformed plan: ") + e.what());
  }
}

inline LoadedPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::Io, "cannot open plan file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PlanFormatError(path + ": " + e.what());
  }
  return plan_from_json(j);
}

/// Outcome of re-checking every step of a plan against a scene.
struct Reverification {
  int steps = 0;
  int mismatches = 0;
  std::vector<std::string> messages;
  bool ok() const { return mismatches == 0; }
};

/// Re-runs the stable-push check on every step and compares verdict, case,
/// and contact assignment with the stored certificate. Also checks that each
/// stored twist carries its waypoint to the next and that the grasp holds.
inline Reverification reverify_plan(const PushModel& model, const PushPlan& plan) {
  Reverification r;
  const Scene& s = model.scene();
  auto fail = [&](const std::string& m) {
    ++r.mismatches;
    r.messages.push_back(m);
  };
  GraspPose expected_start = plan.init;
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const auto& seg = plan.segments[k];
    const int p = s.pusher_index(seg.pusher);
    if (p < 0) {
      fail("segment " + std::to_string(k) + ": unknown pusher '" + seg.pusher + "'");
      continue;
    }
    if (!(seg.waypoints.front() == expected_start)) fail("segment " + std::to_string(k) + ": discontinuous start");
    for (std::size_t i = 0; i < seg.steps.size(); ++i) {
      ++r.steps;
      const std::string where = "segment " + std::to_string(k) + " step " + std::to_string(i);
      const auto& st = seg.steps[i];
      const GraspPose& a = seg.waypoints[i];
      const GraspPose& b = seg.waypoints[i + 1];
      const ObjectTwist tw = step_twist(a, b, s.dynamics.dt);
      const double dv = std::abs(tw.vx - st.twist.vx) + std::abs(tw.vz - st.twist.vz) + std::abs(tw.omega - st.twist.omega);
      if (dv > 1e-9 * (1.0 + std::abs(tw.vx) + std::abs(tw.vz) + std::abs(tw.omega))) fail(where + ": twist does not match waypoints");
      if (!grasp_maintained(s, b)) fail(where + ": grasp lost");
      if (st.twist.is_zero()) {
        fail(where + ": zero twist");
        continue;
      }
      const auto c = check_stable_push(model, a, st.twist, p);
      if (c.feasible != st.certificate.feasible || c.push_case != st.certificate.push_case ||
          c.sticking_points != st.certificate.sticking_points) {
        fail(where + ": verdict differs from stored certificate");
      } else if (!c.feasible) {
        fail(where + ": step is not a stable push");
      }
    }
    expected_start = seg.waypoints.back();
  }
  return r;
}

}  // namespace stablepush
