#pragma once

// Scene file reader/writer. Files are JSON with the top-level keys object,
// fingers, pushers, gravity, planner, dynamics. Every dimensional quantity is a
// {"value": ..., "unit": "..."} object; unknown keys are rejected. See
// docs/scene_format.md.

#include "stablepush/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace stablepush {

using json = nlohmann::json;

enum class Dim { Length, Mass, Force, Angle, Time, Acceleration, Inertia, Speed };

namespace detail {

inline const std::map<std::string, double>& unit_table(Dim d) {
  static const std::map<std::string, double> length{{"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
  static const std::map<std::string, double> mass{{"g", 1e-3}, {"kg", 1.0}};
  static const std::map<std::string, double> force{{"N", 1.0}};
  static const std::map<std::string, double> angle{{"deg", kPi / 180.0}, {"rad", 1.0}};
  static const std::map<std::string, double> time{{"s", 1.0}, {"ms", 1e-3}};
  static const std::map<std::string, double> accel{{"m/s^2", 1.0}, {"mm/s^2", 1e-3}};
  static const std::map<std::string, double> inertia{
      {"g*mm^2", 1e-9}, {"kg*mm^2", 1e-6}, {"kg*m^2", 1.0}};
  static const std::map<std::string, double> speed{{"m/s", 1.0}, {"mm/s", 1e-3}};
  switch (d) {
    case Dim::Length: return length;
    case Dim::Mass: return mass;
    case Dim::Force: return force;
    case Dim::Angle: return angle;
    case Dim::Time: return time;
    case Dim::Acceleration: return accel;
    case Dim::Inertia: return inertia;
    case Dim::Speed: return speed;
  }
  return length;
}

inline const char* dim_name(Dim d) {
  switch (d) {
    case Dim::Length: return "length";
    case Dim::Mass: return "mass";
    case Dim::Force: return "force";
    case Dim::Angle: return "angle";
    case Dim::Time: return "time";
    case Dim::Acceleration: return "acceleration";
    case Dim::Inertia: return "inertia";
    case Dim::Speed: return "speed";
  }
  return "?";
}

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& msg) {
  throw SceneError(SceneError::Kind::Parse, path + ": " + msg);
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) parse_fail(path, "unknown key '" + it.key() + "'");
  }
}

inline const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) parse_fail(path, std::string("missing key '") + key + "'");
  return j.at(key);
}

inline double unit_factor(const json& q, Dim d, const std::string& path) {
  if (!q.is_object()) parse_fail(path, "expected a {value, unit} quantity");
  check_keys(q, path, {"value", "unit"});
  if (!q.contains("unit")) {
    throw SceneError(SceneError::Kind::Unit,
                     path + ": missing unit tag (expected " + dim_name(d) + ")");
  }
  if (!q.at("unit").is_string()) throw SceneError(SceneError::Kind::Unit, path + ": unit must be a string");
  const auto u = q.at("unit").get<std::string>();
  const auto& table = unit_table(d);
  const auto it = table.find(u);
  if (it == table.end()) {
    throw SceneError(SceneError::Kind::Unit,
                     path + ": unknown " + std::string(dim_name(d)) + " unit '" + u + "'");
  }
  if (!q.contains("value")) parse_fail(path, "missing key 'value'");
  return it->second;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

inline double quantity(const json& q, Dim d, const std::string& path) {
  const double f = unit_factor(q, d, path);
  return number(q.at("value"), path + ".value") * f;
}

inline Vec2 pair_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) parse_fail(path, "expected [x, z]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline Vec2 quantity_vec2(const json& q, Dim d, const std::string& path) {
  const double f = unit_factor(q, d, path);
  return pair_of(q.at("value"), path + ".value") * f;
}

inline std::vector<Vec2> quantity_points(const json& q, Dim d, const std::string& path) {
  const double f = unit_factor(q, d, path);
  const auto& arr = q.at("value");
  if (!arr.is_array()) parse_fail(path + ".value", "expected a list of [x, z]");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(pair_of(arr[i], path + ".value[" + std::to_string(i) + "]") * f);
  }
  return out;
}

inline json q(double v, const char* unit) { return json{{"value", v}, {"unit", unit}}; }
inline json q2(const Vec2& v, const char* unit) {
  return json{{"value", json::array({v.x(), v.y()})}, {"unit", unit}};
}

inline PatchGeometry parse_patch(const json& j, const std::string& path, bool allow_circle) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  const auto shape = require(j, "shape", path);
  if (!shape.is_string()) parse_fail(path + ".shape", "expected a string");
  const auto s = shape.get<std::string>();
  PatchGeometry g;
  if (s == "point") {
    check_keys(j, path, {"shape", "position"});
    g.shape = PatchShape::Point;
    g.a = quantity_vec2(require(j, "position", path), Dim::Length, path + ".position");
    g.b = g.a;
  } else if (s == "line") {
    check_keys(j, path, {"shape", "start", "end"});
    g.shape = PatchShape::Line;
    g.a = quantity_vec2(require(j, "start", path), Dim::Length, path + ".start");
    g.b = quantity_vec2(require(j, "end", path), Dim::Length, path + ".end");
  } else if (s == "circle" && allow_circle) {
    check_keys(j, path, {"shape", "center", "radius"});
    g.shape = PatchShape::Circle;
    g.a = quantity_vec2(require(j, "center", path), Dim::Length, path + ".center");
    g.radius = quantity(require(j, "radius", path), Dim::Length, path + ".radius");
  } else {
    parse_fail(path + ".shape", "unsupported shape '" + s + "'");
  }
  return g;
}

inline json patch_to_json(const PatchGeometry& g) {
  switch (g.shape) {
    case PatchShape::Point: return {{"shape", "point"}, {"position", q2(g.a * 1e3, "mm")}};
    case PatchShape::Line:
      return {{"shape", "line"}, {"start", q2(g.a * 1e3, "mm")}, {"end", q2(g.b * 1e3, "mm")}};
    case PatchShape::Circle:
      return {{"shape", "circle"}, {"center", q2(g.a * 1e3, "mm")}, {"radius", q(g.radius * 1e3, "mm")}};
  }
  return {};
}

}  // namespace detail

/// Parses and validates a scene document.
inline Scene scene_from_json(const json& root) {
  using namespace detail;
  check_keys(root, "scene", {"object", "fingers", "pushers", "gravity", "planner", "dynamics"});
  Scene s;

  const auto& o = require(root, "object", "scene");
  check_keys(o, "object", {"name", "silhouette", "mass", "com", "inertia"});
  if (o.contains("name")) {
    if (!o.at("name").is_string()) parse_fail("object.name", "expected a string");
    s.object.name = o.at("name").get<std::string>();
  }
  s.object.silhouette = quantity_points(require(o, "silhouette", "object"), Dim::Length, "object.silhouette");
  s.object.mass = quantity(require(o, "mass", "object"), Dim::Mass, "object.mass");
  if (o.contains("com")) {
    s.object.com = quantity_vec2(o.at("com"), Dim::Length, "object.com");
    s.object.com_given = true;
  }
  if (o.contains("inertia")) {
    s.object.inertia = quantity(o.at("inertia"), Dim::Inertia, "object.inertia");
    s.object.inertia_given = true;
  }

  const auto& f = require(root, "fingers", "scene");
  check_keys(f, "fingers", {"patch", "grip_force", "mu", "discretization"});
  s.fingers.patch = parse_patch(require(f, "patch", "fingers"), "fingers.patch", true);
  s.fingers.grip_force = quantity(require(f, "grip_force", "fingers"), Dim::Force, "fingers.grip_force");
  s.fingers.mu = number(require(f, "mu", "fingers"), "fingers.mu");
  if (f.contains("discretization")) {
    const auto& d = f.at("discretization");
    check_keys(d, "fingers.discretization", {"count", "rings", "points_per_ring"});
    if (d.contains("count")) s.fingers.discretization.count = integer(d.at("count"), "fingers.discretization.count");
    if (d.contains("rings")) s.fingers.discretization.rings = integer(d.at("rings"), "fingers.discretization.rings");
    if (d.contains("points_per_ring")) {
      s.fingers.discretization.points_per_ring =
          integer(d.at("points_per_ring"), "fingers.discretization.points_per_ring");
    }
  }

  const auto& ps = require(root, "pushers", "scene");
  if (!ps.is_array()) parse_fail("pushers", "expected a list");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string path = "pushers[" + std::to_string(i) + "]";
    const auto& pj = ps[i];
    check_keys(pj, path, {"id", "geometry", "mu", "points", "normal"});
    Pusher p;
    const auto& id = require(pj, "id", path);
    if (!id.is_string()) parse_fail(path + ".id", "expected a string");
    p.id = id.get<std::string>();
    p.geometry = parse_patch(require(pj, "geometry", path), path + ".geometry", false);
    p.mu = number(require(pj, "mu", path), path + ".mu");
    if (pj.contains("points")) p.points = integer(pj.at("points"), path + ".points");
    if (p.geometry.shape == PatchShape::Point) p.points = 1;
    if (pj.contains("normal")) {
      p.normal = pair_of(pj.at("normal"), path + ".normal");
      p.normal_given = true;
    }
    s.pushers.push_back(std::move(p));
  }

  if (root.contains("gravity")) s.gravity = quantity_vec2(root.at("gravity"), Dim::Acceleration, "gravity");

  if (root.contains("planner")) {
    const auto& p = root.at("planner");
    auto& pp = s.planner;
    check_keys(p, "planner",
               {"step_translation", "step_rotation", "rotation_weight", "goal_tolerance", "distance_weight",
                "switchover_weight", "switchover_threshold", "temperature", "rewire_radius", "max_iterations",
                "seed", "goal_bias", "sample_margin", "time_budget"});
    auto mm = [&](const char* key) { return quantity(p.at(key), Dim::Length, std::string("planner.") + key) * 1e3; };
    if (p.contains("step_translation")) pp.step_translation = mm("step_translation");
    if (p.contains("step_rotation")) pp.step_rotation = quantity(p.at("step_rotation"), Dim::Angle, "planner.step_rotation");
    if (p.contains("rotation_weight")) {
      const auto& rw = p.at("rotation_weight");
      check_keys(rw, "planner.rotation_weight", {"value", "unit"});
      if (!rw.contains("unit") || rw.at("unit") != "mm/rad") {
        throw SceneError(SceneError::Kind::Unit, "planner.rotation_weight: unit must be 'mm/rad'");
      }
      pp.rotation_weight = number(require(rw, "value", "planner.rotation_weight"), "planner.rotation_weight.value");
    }
    if (p.contains("goal_tolerance")) {
      const auto& g = p.at("goal_tolerance");
      check_keys(g, "planner.goal_tolerance", {"translation", "rotation"});
      if (g.contains("translation")) {
        pp.goal_tolerance_translation = quantity(g.at("translation"), Dim::Length, "planner.goal_tolerance.translation") * 1e3;
      }
      if (g.contains("rotation")) {
        pp.goal_tolerance_rotation = quantity(g.at("rotation"), Dim::Angle, "planner.goal_tolerance.rotation");
      }
    }
    if (p.contains("distance_weight")) pp.distance_weight = number(p.at("distance_weight"), "planner.distance_weight");
    if (p.contains("switchover_weight")) pp.switchover_weight = mm("switchover_weight");
    if (p.contains("switchover_threshold")) {
      pp.switchover_threshold = integer(p.at("switchover_threshold"), "planner.switchover_threshold");
    }
    if (p.contains("temperature")) {
      const auto& t = p.at("temperature");
      check_keys(t, "planner.temperature", {"initial", "rate", "n_fail_max", "k"});
      if (t.contains("initial")) pp.temperature_init = number(t.at("initial"), "planner.temperature.initial");
      if (t.contains("rate")) pp.temperature_rate = number(t.at("rate"), "planner.temperature.rate");
      if (t.contains("n_fail_max")) pp.n_fail_max = integer(t.at("n_fail_max"), "planner.temperature.n_fail_max");
      if (t.contains("k")) pp.temperature_k = quantity(t.at("k"), Dim::Length, "planner.temperature.k") * 1e3;
    }
    if (p.contains("rewire_radius")) pp.rewire_radius = mm("rewire_radius");
    if (p.contains("max_iterations")) pp.max_iterations = integer(p.at("max_iterations"), "planner.max_iterations");
    if (p.contains("seed")) {
      if (!p.at("seed").is_number_unsigned() && !p.at("seed").is_number_integer()) {
        parse_fail("planner.seed", "expected an integer");
      }
      pp.seed = p.at("seed").get<std::uint64_t>();
    }
    if (p.contains("goal_bias")) pp.goal_bias = number(p.at("goal_bias"), "planner.goal_bias");
    if (p.contains("sample_margin")) {
      const auto& m = p.at("sample_margin");
      check_keys(m, "planner.sample_margin", {"translation", "rotation"});
      if (m.contains("translation")) {
        pp.sample_margin_translation = quantity(m.at("translation"), Dim::Length, "planner.sample_margin.translation") * 1e3;
      }
      if (m.contains("rotation")) {
        pp.sample_margin_rotation = quantity(m.at("rotation"), Dim::Angle, "planner.sample_margin.rotation");
      }
    }
    if (p.contains("time_budget")) pp.time_budget = quantity(p.at("time_budget"), Dim::Time, "planner.time_budget");
  }

  if (root.contains("dynamics")) {
    const auto& d = root.at("dynamics");
    auto& dp = s.dynamics;
    check_keys(d, "dynamics",
               {"dt", "stick_tolerance_rel", "stick_tolerance_abs", "friction_facets", "feasibility_tol"});
    if (d.contains("dt")) dp.dt = quantity(d.at("dt"), Dim::Time, "dynamics.dt");
    if (d.contains("stick_tolerance_rel")) {
      dp.stick_tolerance_rel = number(d.at("stick_tolerance_rel"), "dynamics.stick_tolerance_rel");
    }
    if (d.contains("stick_tolerance_abs")) {
      dp.stick_tolerance_abs = quantity(d.at("stick_tolerance_abs"), Dim::Speed, "dynamics.stick_tolerance_abs");
    }
    if (d.contains("friction_facets")) dp.friction_facets = integer(d.at("friction_facets"), "dynamics.friction_facets");
    if (d.contains("feasibility_tol")) dp.feasibility_tol = number(d.at("feasibility_tol"), "dynamics.feasibility_tol");
  }

  validate_scene(s);
  return s;
}

namespace detail {

// Rounds every floating-point value to 12 significant digits so that unit
// conversion noise does not survive a save/load cycle.
inline void round_numbers(json& j) {
  if (j.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", j.get<double>());
    j = std::strtod(buf, nullptr);
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v);
  }
}

}  // namespace detail

/// Canonical document for a validated scene (mm / g / N / deg; derived values
/// written explicitly).
inline json scene_to_json(const Scene& s) {
  using detail::q;
  using detail::q2;
  json o;
  if (!s.object.name.empty()) o["name"] = s.object.name;
  json verts = json::array();
  for (const auto& v : s.object.silhouette) verts.push_back(json::array({v.x() * 1e3, v.y() * 1e3}));
  o["silhouette"] = {{"value", verts}, {"unit", "mm"}};
  o["mass"] = q(s.object.mass * 1e3, "g");
  o["com"] = q2(s.object.com * 1e3, "mm");
  o["inertia"] = q(s.object.inertia * 1e9, "g*mm^2");

  json f;
  f["patch"] = detail::patch_to_json(s.fingers.patch);
  f["grip_force"] = q(s.fingers.grip_force, "N");
  f["mu"] = s.fingers.mu;
  f["discretization"] = {{"count", s.fingers.discretization.count},
                         {"rings", s.fingers.discretization.rings},
                         {"points_per_ring", s.fingers.discretization.points_per_ring}};

  json ps = json::array();
  for (const auto& p : s.pushers) {
    json pj{{"id", p.id}, {"geometry", detail::patch_to_json(p.geometry)}, {"mu", p.mu}, {"points", p.points}};
    if (p.normal_given) pj["normal"] = json::array({p.normal.x(), p.normal.y()});
    ps.push_back(pj);
  }

  const auto& pp = s.planner;
  json pl{{"step_translation", q(pp.step_translation, "mm")},
          {"step_rotation", q(rad_to_deg(pp.step_rotation), "deg")},
          {"rotation_weight", {{"value", pp.rotation_weight}, {"unit", "mm/rad"}}},
          {"goal_tolerance",
           {{"translation", q(pp.goal_tolerance_translation, "mm")},
            {"rotation", q(rad_to_deg(pp.goal_tolerance_rotation), "deg")}}},
          {"distance_weight", pp.distance_weight},
          {"switchover_weight", q(pp.switchover_weight, "mm")},
          {"switchover_threshold", pp.switchover_threshold},
          {"temperature",
           {{"initial", pp.temperature_init},
            {"rate", pp.temperature_rate},
            {"n_fail_max", pp.n_fail_max},
            {"k", q(pp.temperature_k, "mm")}}},
          {"rewire_radius", q(pp.rewire_radius, "mm")},
          {"max_iterations", pp.max_iterations},
          {"seed", pp.seed},
          {"goal_bias", pp.goal_bias},
          {"sample_margin",
           {{"translation", q(pp.sample_margin_translation, "mm")},
            {"rotation", q(rad_to_deg(pp.sample_margin_rotation), "deg")}}},
          {"time_budget", q(pp.time_budget, "s")}};

  const auto& dp = s.dynamics;
  json dy{{"dt", q(dp.dt, "s")},
          {"stick_tolerance_rel", dp.stick_tolerance_rel},
          {"stick_tolerance_abs", q(dp.stick_tolerance_abs * 1e3, "mm/s")},
          {"friction_facets", dp.friction_facets},
          {"feasibility_tol", dp.feasibility_tol}};

  json out{{"object", o},          {"fingers", f},  {"pushers", ps},
           {"gravity", q2(s.gravity, "m/s^2")}, {"planner", pl}, {"dynamics", dy}};
  detail::round_numbers(out);
  return out;
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError(SceneError::Kind::Io, "cannot open scene file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SceneError(SceneError::Kind::Parse, path + ": " + e.what());
  }
  return scene_from_json(root);
}

inline void save_scene(const Scene& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SceneError(SceneError::Kind::Io, "cannot write scene file '" + path + "'");
  out << scene_to_json(s).dump(2) << '\n';
}

/// 64-bit FNV-1a of a byte string.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Content hash of the canonical form of a scene, as "fnv1a64:<hex>".
inline std::string scene_hash(const Scene& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(scene_to_json(s).dump())));
  return std::string("fnv1a64:") + buf;
}

}  // namespace stablepush
