#pragma once

// SVG keyframes of a plan, drawn in the gripper frame (fingers fixed).
// Output is a pure function of scene and plan: fixed-precision numbers, no
// timestamps.

#include "stablepush/planner.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace stablepush {

struct RenderOptions {
  int stride = 5;            // unit steps between frames within a segment
  double pixels_per_mm = 4.0;
  double margin_mm = 15.0;
};

struct Keyframe {
  GraspPose pose;
  int segment = -1;  // -1: before any push
  std::string pusher;
  std::vector<GraspPose> trace;  // object-origin history up to this frame
};

/// Frames at the start, every `stride` steps, and at each segment end.
inline std::vector<Keyframe> keyframes(const PushPlan& plan, int stride) {
  stride = std::max(1, stride);
  std::vector<Keyframe> out;
  std::vector<GraspPose> trace{plan.init};
  out.push_back({plan.init, -1, plan.segments.empty() ? "" : plan.segments.front().pusher, trace});
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const auto& seg = plan.segments[k];
    const int n = static_cast<int>(seg.steps.size());
    for (int i = 1; i <= n; ++i) {
      trace.push_back(seg.waypoints[static_cast<std::size_t>(i)]);
      if (i % stride == 0 || i == n) {
        out.push_back({seg.waypoints[static_cast<std::size_t>(i)], static_cast<int>(k), seg.pusher, trace});
      }
    }
  }
  return out;
}

namespace detail {

struct SvgView {
  double min_x, max_z, scale;  // mm, mm, px/mm
  double px(double x_mm) const { return (x_mm - min_x) * scale; }
  double py(double z_mm) const { return (max_z - z_mm) * scale; }
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return std::string(buf) == "-0.000" ? "0.000" : buf;
}

inline std::string xml_escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline Vec2 to_gripper_mm(const Vec2& p_obj_m, const GraspPose& q) {
  return rotate(p_obj_m, q.theta) * 1e3 + Vec2(q.x, q.z);
}

inline std::string svg_points(const std::vector<Vec2>& mm, const SvgView& v) {
  std::string s;
  for (std::size_t i = 0; i < mm.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v.px(mm[i].x())) + "," + fmt(v.py(mm[i].y()));
  }
  return s;
}

inline std::vector<Vec2> patch_outline_mm(const PatchGeometry& g, const GraspPose* q) {
  auto map = [&](const Vec2& p) { return q ? to_gripper_mm(p, *q) : Vec2(p * 1e3); };
  std::vector<Vec2> out;
  switch (g.shape) {
    case PatchShape::Point: out = {map(g.a)}; break;
    case PatchShape::Line: out = {map(g.a), map(g.b)}; break;
    case PatchShape::Circle:
      for (int i = 0; i < 48; ++i) {
        const double a = 2.0 * kPi * i / 48;
        out.push_back(map(g.a + g.radius * Vec2(std::cos(a), std::sin(a))));
      }
      break;
  }
  return out;
}

inline std::string draw_patch(const std::vector<Vec2>& pts, PatchShape shape, const SvgView& v,
                              const char* color, double width) {
  if (shape == PatchShape::Point || pts.size() == 1) {
    return "<circle cx=\"" + fmt(v.px(pts[0].x())) + "\" cy=\"" + fmt(v.py(pts[0].y())) + "\" r=\"" +
           fmt(width) + "\" fill=\"" + color + "\"/>\n";
  }
  const char* tag = shape == PatchShape::Circle ? "polygon" : "polyline";
  const std::string fill = shape == PatchShape::Circle ? std::string(color) : "none";
  return std::string("<") + tag + " points=\"" + svg_points(pts, v) + "\" fill=\"" + fill + "\" fill-opacity=\"0.5\" stroke=\"" +
         color + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
}

}  // namespace detail

/// One SVG document per keyframe. The view box covers the whole plan.
inline std::vector<std::string> render_plan(const Scene& s, const PushPlan& plan, const RenderOptions& opt = {}) {
  using namespace detail;
  const auto frames = keyframes(plan, opt.stride);

  double min_x = 1e300, max_x = -1e300, min_z = 1e300, max_z = -1e300;
  auto grow = [&](const Vec2& p) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_z = std::min(min_z, p.y());
    max_z = std::max(max_z, p.y());
  };
  for (const auto& f : frames) {
    for (const auto& p : s.object.silhouette) grow(to_gripper_mm(p, f.pose));
  }
  for (const auto& c : s.finger_contacts) grow(c.position * 1e3);
  min_x -= opt.margin_mm;
  max_x += opt.margin_mm;
  min_z -= opt.margin_mm;
  max_z += opt.margin_mm;
  const SvgView view{min_x, max_z, opt.pixels_per_mm};
  const double w = (max_x - min_x) * view.scale, h = (max_z - min_z) * view.scale;

  std::vector<std::string> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
                      "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    std::vector<Vec2> sil;
    for (const auto& p : s.object.silhouette) sil.push_back(to_gripper_mm(p, f.pose));
    svg += "<polygon points=\"" + svg_points(sil, view) + "\" fill=\"#d0d8e8\" stroke=\"#203050\" stroke-width=\"1.500\"/>\n";

    std::vector<Vec2> trace;
    for (const auto& q : f.trace) trace.emplace_back(q.x, q.z);
    if (trace.size() > 1) {
      svg += "<polyline points=\"" + svg_points(trace, view) + "\" fill=\"none\" stroke=\"#808080\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (const auto& p : s.pushers) {
      const bool active = p.id == f.pusher;
      const auto pts = patch_outline_mm(p.geometry, &f.pose);
      svg += draw_patch(pts, p.geometry.shape, view, active ? "#e000e0" : "#b0b0b0", active ? 4.0 : 2.0);
    }
    svg += draw_patch(patch_outline_mm(s.fingers.patch, nullptr), s.fingers.patch.shape, view, "#20a020", 3.0);

    char label[160];
    std::snprintf(label, sizeof label, "frame %zu  segment %d  pusher %s  x %.2f z %.2f theta %.2f deg", k, f.segment,
                  f.pusher.empty() ? "-" : f.pusher.c_str(), f.pose.x, f.pose.z, rad_to_deg(f.pose.theta));
    svg += "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\"12\">" + xml_escape(label) + "</text>\n";
    svg += "</svg>\n";
    out.push_back(std::move(svg));
  }
  return out;
}

}  // namespace stablepush
