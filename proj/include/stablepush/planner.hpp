#pragma once

// Sampling-based regrasp planner over grasp poses (x, z, theta). The tree is
// grown with stable pushes only; node cost is the weighted distance to the
// goal plus a penalty per pusher switch-over, and connections are chosen and
// rewired to keep the switch-over count low.

#include "stablepush/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stablepush {

/// Weighted SE(2) distance in mm: sqrt(dx^2 + dz^2 + (w * dtheta)^2).
inline double distance(const GraspPose& a, const GraspPose& b, double rotation_weight) {
  const double dx = a.x - b.x, dz = a.z - b.z, dt = rotation_weight * wrap_angle(a.theta - b.theta);
  return std::sqrt(dx * dx + dz * dz + dt * dt);
}

inline bool within_goal(const GraspPose& q, const GraspPose& goal, const PlannerParams& p) {
  return std::abs(q.x - goal.x) <= p.goal_tolerance_translation + 1e-12 &&
         std::abs(q.z - goal.z) <= p.goal_tolerance_translation + 1e-12 &&
         std::abs(wrap_angle(q.theta - goal.theta)) <= p.goal_tolerance_rotation + 1e-12;
}

/// Adaptive temperature of the transition test.
struct TemperatureState {
  double temperature = 1.0;
  double rate = 2.0;
  int n_fail_max = 10;
  double k = 1.0;
  int failures = 0;

  static TemperatureState from(const PlannerParams& p) {
    return {p.temperature_init, p.temperature_rate, p.n_fail_max, p.temperature_k, 0};
  }
};

/// Accepts downhill moves; accepts uphill moves with probability
/// exp(-dc / (k T)). An accepted uphill move cools the temperature, and
/// n_fail_max consecutive rejections heat it.
inline bool transition_test(double c_parent, double c_new, TemperatureState& st, std::mt19937_64& rng) {
  const double dc = c_new - c_parent;
  if (dc <= 0.0) return true;
  const double p = st.temperature > 0.0 ? std::exp(-dc / (st.k * st.temperature)) : 0.0;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p) {
    st.temperature /= st.rate;
    st.failures = 0;
    return true;
  }
  if (++st.failures >= st.n_fail_max) {
    st.temperature *= st.rate;
    st.failures = 0;
  }
  return false;
}

/// One unit step from `from` toward `to`: the straight line scaled so that no
/// axis moves more than its step size.
inline GraspPose unit_step(const GraspPose& from, const GraspPose& to, const PlannerParams& p) {
  const double dx = to.x - from.x, dz = to.z - from.z, dt = wrap_angle(to.theta - from.theta);
  double s = 1.0;
  if (std::abs(dx) > p.step_translation) s = std::min(s, p.step_translation / std::abs(dx));
  if (std::abs(dz) > p.step_translation) s = std::min(s, p.step_translation / std::abs(dz));
  if (std::abs(dt) > p.step_rotation) s = std::min(s, p.step_rotation / std::abs(dt));
  if (s == 1.0) return {to.x, to.z, wrap_angle(from.theta + dt)};
  return {from.x + s * dx, from.z + s * dz, wrap_angle(from.theta + s * dt)};
}

/// A tree edge: unit steps along a straight line, all with one pusher.
/// `waypoints` excludes the start pose and ends at the child pose.
struct Edge {
  int pusher = -1;
  std::vector<GraspPose> waypoints;
  std::vector<ObjectTwist> twists;
  std::vector<FeasibilityCertificate> certificates;
};

struct TreeNode {
  GraspPose pose;
  int parent = -1;
  Edge edge;
  int switchovers = 0;
  double cost = 0.0;
  std::vector<int> children;

  int incoming_pusher() const { return edge.pusher; }
};

struct PlanStep {
  ObjectTwist twist;
  FeasibilityCertificate certificate;
};

struct PlanSegment {
  std::string pusher;
  /// Starts at the segment's first pose; consecutive entries are one unit step apart.
  std::vector<GraspPose> waypoints;
  std::vector<PlanStep> steps;
};

struct PushPlan {
  GraspPose init;
  GraspPose goal;
  std::vector<PlanSegment> segments;
  int total_switchovers = 0;
  /// Weighted distance from the final pose to the goal, mm.
  double final_pose_error = 0.0;

  GraspPose final_pose() const {
    return segments.empty() ? init : segments.back().waypoints.back();
  }
};

struct PlannerStats {
  int iterations = 0;
  std::size_t tree_size = 0;
  double wall_time = 0.0;  // s
  double closest_distance = std::numeric_limits<double>::infinity();
  /// (iteration, best switch-over count among goal-region nodes), recorded on change.
  std::vector<std::pair<int, int>> best_switchover_history;
};

class IterationBudgetExhausted : public std::runtime_error {
 public:
  IterationBudgetExhausted(const std::string& what, PlannerStats stats, std::optional<PushPlan> best)
      : std::runtime_error(what), stats_(std::move(stats)), best_(std::move(best)) {}
  const PlannerStats& stats() const { return stats_; }
  /// Best goal-region plan found, if any (its switch-over count exceeds the threshold).
  const std::optional<PushPlan>& best_plan() const { return best_; }

 private:
  PlannerStats stats_;
  std::optional<PushPlan> best_;
};

class Planner {
 public:
  Planner(const PushModel& model, const GraspPose& init, const GraspPose& goal)
      : Planner(model, init, goal, model.scene().planner) {}

  Planner(const PushModel& model, const GraspPose& init, const GraspPose& goal, const PlannerParams& params)
      : model_(&model), params_(params), init_(normalized(init)), goal_(normalized(goal)),
        temperature_(TemperatureState::from(params)), rng_(params.seed) {
    if (!grasp_maintained(model.scene(), init_)) throw std::invalid_argument("initial pose loses the grasp");
    TreeNode root;
    root.pose = init_;
    root.cost = node_cost(init_, 0);
    nodes_.push_back(std::move(root));
    note_goal(0);
  }

  const Scene& scene() const { return model_->scene(); }
  const PlannerParams& params() const { return params_; }
  const GraspPose& goal() const { return goal_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const PlannerStats& stats() const { return stats_; }
  TemperatureState& temperature() { return temperature_; }

  double node_cost(const GraspPose& q, int switchovers) const {
    return params_.distance_weight * distance(q, goal_, params_.rotation_weight) +
           params_.switchover_weight * switchovers;
  }

  /// Switch-overs of a child reached from `parent` through `pusher`.
  int switchovers_via(int parent, int pusher) const {
    const auto& p = nodes_.at(static_cast<std::size_t>(parent));
    return p.switchovers + (p.edge.pusher >= 0 && p.edge.pusher != pusher ? 1 : 0);
  }

  /// Straight-line connection with a fixed pusher, checked step by step.
  std::optional<Edge> connect(const GraspPose& from, const GraspPose& to, int pusher) const {
    const Scene& s = scene();
    const double dx = std::abs(to.x - from.x), dz = std::abs(to.z - from.z);
    const double dt = std::abs(wrap_angle(to.theta - from.theta));
    const int n = std::max(1, static_cast<int>(std::ceil(std::max({dx / params_.step_translation,
                                                                    dz / params_.step_translation,
                                                                    dt / params_.step_rotation}) - 1e-9)));
    const double ddt = wrap_angle(to.theta - from.theta);
    Edge e;
    e.pusher = pusher;
    GraspPose prev = from;
    for (int i = 1; i <= n; ++i) {
      const double f = static_cast<double>(i) / n;
      const GraspPose q = i == n ? to : GraspPose{from.x + f * (to.x - from.x), from.z + f * (to.z - from.z),
                                                  wrap_angle(from.theta + f * ddt)};
      if (!grasp_maintained(s, q)) return std::nullopt;
      const ObjectTwist tw = step_twist(prev, q, s.dynamics.dt);
      if (tw.is_zero()) return std::nullopt;
      auto cert = check_stable_push(*model_, prev, tw, pusher);
      if (!cert.feasible) return std::nullopt;
      e.waypoints.push_back(q);
      e.twists.push_back(tw);
      e.certificates.push_back(std::move(cert));
      prev = q;
    }
    return e;
  }

  /// Tries `preferred` first (if any), then every other pusher in scene order.
  std::optional<Edge> connect_any(const GraspPose& from, const GraspPose& to, int preferred) const {
    if (preferred >= 0) {
      if (auto e = connect(from, to, preferred)) return e;
    }
    return connect_other(from, to, preferred);
  }

  /// Every pusher except `excluded`, in scene order.
  std::optional<Edge> connect_other(const GraspPose& from, const GraspPose& to, int excluded) const {
    for (int p = 0; p < static_cast<int>(scene().pushers.size()); ++p) {
      if (p == excluded) continue;
      if (auto e = connect(from, to, p)) return e;
    }
    return std::nullopt;
  }

  /// Extension by one unit step from node `parent` toward `target`. Returns
  /// the new pose and its single-step edge (first feasible pusher in scene
  /// order), or nothing if the step is rejected.
  std::optional<std::pair<GraspPose, Edge>> extend(int parent, const GraspPose& target) {
    const GraspPose& qp = nodes_.at(static_cast<std::size_t>(parent)).pose;
    const GraspPose qn = unit_step(qp, target, params_);
    if (distance(qn, qp, params_.rotation_weight) <= 0.0) return std::nullopt;
    const double cp = distance(qp, goal_, params_.rotation_weight);
    const double cn = distance(qn, goal_, params_.rotation_weight);
    if (!transition_test(cp, cn, temperature_, rng_)) return std::nullopt;
    if (!grasp_maintained(scene(), qn)) return std::nullopt;
    for (int p = 0; p < static_cast<int>(scene().pushers.size()); ++p) {
      if (auto e = connect(qp, qn, p)) return std::pair{qn, std::move(*e)};
    }
    return std::nullopt;
  }

  /// Among nodes within the rewire radius that connect to `q_new` by a stable
  /// push, the parent giving q_new the fewest switch-overs (ties: lowest
  /// insertion index). `parent` with `edge` is the already-verified default.
  std::pair<int, Edge> optim_edge(const GraspPose& q_new, int parent, Edge edge) const {
    int best = parent;
    int best_sw = switchovers_via(parent, edge.pusher);
    Edge best_edge = std::move(edge);
    auto improves = [&](int sw, int c) { return sw < best_sw || (sw == best_sw && c < best); };
    for (int c : candidates_sorted(q_new)) {
      const auto& node = nodes_[static_cast<std::size_t>(c)];
      if (node.switchovers > best_sw) break;
      // The original parent stays a candidate: its own pusher may avoid a switch-over.
      if (!improves(node.switchovers, c)) continue;
      const int own = node.edge.pusher;
      // Keeping the candidate's own pusher adds no switch-over; the root has none.
      std::optional<Edge> e = own >= 0 ? connect(node.pose, q_new, own) : connect_other(node.pose, q_new, -1);
      if (!e && own >= 0 && improves(node.switchovers + 1, c)) e = connect_other(node.pose, q_new, own);
      if (!e) continue;
      const int sw = switchovers_via(c, e->pusher);
      if (improves(sw, c)) {
        best = c;
        best_sw = sw;
        best_edge = std::move(*e);
      }
    }
    return {best, std::move(best_edge)};
  }

  /// Inserts a node under `parent`; returns its index.
  int add_node(int parent, Edge edge) {
    TreeNode n;
    n.pose = edge.waypoints.back();
    n.parent = parent;
    n.switchovers = switchovers_via(parent, edge.pusher);
    n.cost = node_cost(n.pose, n.switchovers);
    n.edge = std::move(edge);
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    note_goal(id);
    return id;
  }

  /// Re-parents in-radius nodes through `q_new` when that strictly lowers
  /// their switch-over count; returns the number of re-parented nodes.
  int rewire(int q_new) {
    int changed = 0;
    const GraspPose pose = nodes_[static_cast<std::size_t>(q_new)].pose;
    const int p_new = nodes_[static_cast<std::size_t>(q_new)].edge.pusher;
    const int sw_new = nodes_[static_cast<std::size_t>(q_new)].switchovers;
    for (int c : candidates_sorted(pose)) {
      if (c == q_new || c == 0) continue;
      const auto& node = nodes_[static_cast<std::size_t>(c)];
      // Ancestors of q_new never pass this test, so no cycle can form.
      if (sw_new >= node.switchovers) continue;
      std::optional<Edge> e = connect(pose, node.pose, p_new);
      if (!e && sw_new + 1 < node.switchovers) {
        e = node.edge.pusher != p_new ? connect(pose, node.pose, node.edge.pusher) : std::nullopt;
        if (!e) {
          for (int p = 0; p < static_cast<int>(scene().pushers.size()) && !e; ++p) {
            if (p != p_new && p != node.edge.pusher) e = connect(pose, node.pose, p);
          }
        }
      }
      if (!e) continue;
      reparent(c, q_new, std::move(*e));
      ++changed;
    }
    return changed;
  }

  /// Runs the planner until a goal-region node meets the switch-over
  /// threshold. Throws IterationBudgetExhausted otherwise.
  PushPlan plan() {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    record_best(0);
    while (!done()) {
      if (stats_.iterations >= params_.max_iterations ||
          (params_.time_budget > 0.0 && elapsed() > params_.time_budget)) {
        stats_.tree_size = nodes_.size();
        stats_.wall_time = elapsed();
        std::optional<PushPlan> best;
        if (best_goal_ >= 0) best = extract(best_goal_);
        throw IterationBudgetExhausted("no plan within " + std::to_string(stats_.iterations) + " iterations", stats_,
                                       std::move(best));
      }
      ++stats_.iterations;
      iterate();
      record_best(stats_.iterations);
    }
    stats_.tree_size = nodes_.size();
    stats_.wall_time = elapsed();
    return extract(best_goal_);
  }

  /// One outer iteration: sample, pick the nearest node, and extend toward
  /// the sample until the sample is reached or a step is rejected.
  void iterate() {
    const GraspPose target = sample();
    int parent = nearest(target);
    for (;;) {
      auto step = extend(parent, target);
      if (!step) break;
      auto [best_parent, edge] = optim_edge(step->first, parent, std::move(step->second));
      const int id = add_node(best_parent, std::move(edge));
      rewire(id);
      parent = id;
      if (distance(nodes_[static_cast<std::size_t>(id)].pose, target, params_.rotation_weight) <= 1e-9) break;
      if (done()) break;
    }
  }

  /// Root-path switch-overs recomputed from the incoming pushers.
  int recount_switchovers(int node) const {
    int sw = 0;
    int child_pusher = -1;
    for (int n = node; n >= 0; n = nodes_[static_cast<std::size_t>(n)].parent) {
      const int p = nodes_[static_cast<std::size_t>(n)].edge.pusher;
      if (child_pusher >= 0 && p >= 0 && p != child_pusher) ++sw;
      child_pusher = p;
    }
    return sw;
  }

  /// Plan from the root to `node`; re-verifies every stored certificate.
  PushPlan extract(int node) const {
    std::vector<int> path;
    for (int n = node; n > 0; n = nodes_[static_cast<std::size_t>(n)].parent) path.push_back(n);
    std::reverse(path.begin(), path.end());
    PushPlan plan;
    plan.init = init_;
    plan.goal = goal_;
    GraspPose prev = init_;
    for (int n : path) {
      const auto& e = nodes_[static_cast<std::size_t>(n)].edge;
      const std::string& id = scene().pushers[static_cast<std::size_t>(e.pusher)].id;
      if (plan.segments.empty() || plan.segments.back().pusher != id) {
        plan.segments.push_back({id, {prev}, {}});
      }
      auto& seg = plan.segments.back();
      GraspPose from = prev;
      for (std::size_t i = 0; i < e.waypoints.size(); ++i) {
        const auto again = check_stable_push(*model_, from, e.twists[i], e.pusher);
        if (again.feasible != e.certificates[i].feasible || !grasp_maintained(scene(), e.waypoints[i])) {
          throw std::logic_error("stored certificate failed re-verification");
        }
        seg.waypoints.push_back(e.waypoints[i]);
        seg.steps.push_back({e.twists[i], e.certificates[i]});
        from = e.waypoints[i];
      }
      prev = nodes_[static_cast<std::size_t>(n)].pose;
    }
    plan.total_switchovers = plan.segments.empty() ? 0 : static_cast<int>(plan.segments.size()) - 1;
    plan.final_pose_error = distance(plan.final_pose(), goal_, params_.rotation_weight);
    return plan;
  }

  int best_goal_node() const { return best_goal_; }

 private:
  static GraspPose normalized(GraspPose q) {
    q.theta = wrap_angle(q.theta);
    return q;
  }

  bool done() const {
    return best_goal_ >= 0 &&
           nodes_[static_cast<std::size_t>(best_goal_)].switchovers <= params_.switchover_threshold;
  }

  void note_goal(int id) {
    const GraspPose& q = nodes_[static_cast<std::size_t>(id)].pose;
    stats_.closest_distance = std::min(stats_.closest_distance, distance(q, goal_, params_.rotation_weight));
    if (!within_goal(q, goal_, params_)) return;
    goal_nodes_.push_back(id);
    refresh_best_goal();
  }

  void refresh_best_goal() {
    best_goal_ = -1;
    for (int g : goal_nodes_) {
      if (best_goal_ < 0 || better_goal(g, best_goal_)) best_goal_ = g;
    }
  }

  bool better_goal(int a, int b) const {
    const auto& na = nodes_[static_cast<std::size_t>(a)];
    const auto& nb = nodes_[static_cast<std::size_t>(b)];
    if (na.switchovers != nb.switchovers) return na.switchovers < nb.switchovers;
    if (na.cost != nb.cost) return na.cost < nb.cost;
    return a < b;
  }

  void record_best(int iteration) {
    if (best_goal_ < 0) return;
    const int sw = nodes_[static_cast<std::size_t>(best_goal_)].switchovers;
    auto& h = stats_.best_switchover_history;
    if (h.empty() || h.back().second != sw) h.emplace_back(iteration, sw);
  }

  GraspPose sample() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng_) < params_.goal_bias) return goal_;
    const double mt = params_.sample_margin_translation, mr = params_.sample_margin_rotation;
    const double dth = wrap_angle(goal_.theta - init_.theta);
    auto range = [&](double a, double b, double m) {
      return std::uniform_real_distribution<double>(std::min(a, b) - m, std::max(a, b) + m)(rng_);
    };
    const double x = range(init_.x, goal_.x, mt);
    const double z = range(init_.z, goal_.z, mt);
    const double th = range(init_.theta, init_.theta + dth, mr);
    return {x, z, wrap_angle(th)};
  }

  int nearest(const GraspPose& q) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double d = distance(nodes_[i].pose, q, params_.rotation_weight);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  /// Nodes within the rewire radius, by (switch-overs, insertion index).
  std::vector<int> candidates_sorted(const GraspPose& q) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (distance(nodes_[i].pose, q, params_.rotation_weight) <= params_.rewire_radius) {
        out.push_back(static_cast<int>(i));
      }
    }
    std::sort(out.begin(), out.end(), [&](int a, int b) {
      const int sa = nodes_[static_cast<std::size_t>(a)].switchovers;
      const int sb = nodes_[static_cast<std::size_t>(b)].switchovers;
      return sa != sb ? sa < sb : a < b;
    });
    return out;
  }

  void reparent(int node, int new_parent, Edge edge) {
    auto& old = nodes_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(node)].parent)].children;
    old.erase(std::remove(old.begin(), old.end(), node), old.end());
    nodes_[static_cast<std::size_t>(new_parent)].children.push_back(node);
    auto& n = nodes_[static_cast<std::size_t>(node)];
    n.parent = new_parent;
    n.edge = std::move(edge);
    propagate(node);
    refresh_best_goal();
  }

  void propagate(int root) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      auto& n = nodes_[static_cast<std::size_t>(id)];
      n.switchovers = switchovers_via(n.parent, n.edge.pusher);
      n.cost = node_cost(n.pose, n.switchovers);
      for (int c : n.children) stack.push_back(c);
    }
  }

  const PushModel* model_;
  PlannerParams params_;
  GraspPose init_;
  GraspPose goal_;
  TemperatureState temperature_;
  std::mt19937_64 rng_;
  std::vector<TreeNode> nodes_;
  std::vector<int> goal_nodes_;
  int best_goal_ = -1;
  PlannerStats stats_;
};

}  // namespace stablepush
