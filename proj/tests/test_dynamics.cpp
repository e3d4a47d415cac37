#include "stablepush/dynamics.hpp"

#include "oracles.hpp"
#include "random_scene.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace stablepush;

namespace {

Scene with_pusher_mu(Scene s, double mu) {
  for (auto& p : s.pushers) p.mu = mu;
  validate_scene(s);
  return s;
}

ObjectTwist x_translation(const Scene& s) { return {1e-3 / s.dynamics.dt, 0.0, 0.0}; }

ObjectTwist rotation_about_origin(const Scene& s, double deg) { return {0.0, 0.0, deg_to_rad(deg) / s.dynamics.dt}; }

}  // namespace

TEST(GraspMap, TorqueRowIsInPlaneCross) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    PointContact c;
    const double a = u(rng) * kPi;
    c.position = {u(rng), u(rng)};
    c.normal = Vec3(std::cos(a), 0.0, std::sin(a));
    c.tangent = Vec3(std::sin(a), 0.0, -std::cos(a));
    c.other = Vec3::UnitY();
    const Vec2 com(u(rng), u(rng));
    const GraspMap g = grasp_map(c, com);
    const Vec3 local(u(rng), u(rng), u(rng));
    const Vec3 w = g * local;
    const Vec3 f3 = local(0) * c.normal + local(1) * c.tangent + local(2) * c.other;
    const Vec3 r3(c.position.x() - com.x(), 0.0, c.position.y() - com.y());
    EXPECT_NEAR(w(0), f3.x(), 1e-14);
    EXPECT_NEAR(w(1), f3.z(), 1e-14);
    EXPECT_NEAR(w(2), r3.cross(f3).y(), 1e-14);
  }
}

TEST(ClassifyModes, PureTranslationSlidesEverywhere) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  const auto modes = classify_modes(s, {}, {1.0, 0.0, 0.0});
  ASSERT_EQ(modes.size(), 9u);
  for (const auto& m : modes) {
    EXPECT_FALSE(m.sticking);
    EXPECT_NEAR((m.slide_dir - Vec2(1, 0)).norm(), 0.0, 1e-15);
  }
}

TEST(ClassifyModes, RotationAboutPatchCenterSticksOnlyTheCenter) {
  const Scene s = sptest::load("scenes/disc_rolling.json");
  const auto modes = classify_modes(s, {}, rotation_about_origin(s, 2.0));
  EXPECT_TRUE(modes[0].sticking);
  for (std::size_t i = 1; i < modes.size(); ++i) {
    EXPECT_FALSE(modes[i].sticking);
    const Vec2 r = s.finger_contacts[i].position;
    EXPECT_NEAR(modes[i].slide_dir.dot(r), 0.0, 1e-12);
  }
}

TEST(ClassifyModes, RotationAboutOutsidePointSlidesPerpendicularToRadius) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  const Vec2 center(0.03, 0.02);
  const double w = 0.3;
  const Vec2 v = angular_velocity_cross(w, -center);
  const auto modes = classify_modes(s, {}, {v.x(), v.y(), w});
  for (std::size_t i = 0; i < modes.size(); ++i) {
    ASSERT_FALSE(modes[i].sticking);
    const Vec2 r = s.finger_contacts[i].position - center;
    EXPECT_NEAR(modes[i].slide_dir.dot(r), 0.0, 1e-12);
    // Direction follows omega x r.
    EXPECT_GT(modes[i].slide_dir.dot(angular_velocity_cross(w, r)), 0.0);
  }
}

TEST(ClassifyModes, ZeroTwistIsRejected) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  EXPECT_THROW(classify_modes(s, {}, {}), std::invalid_argument);
}

TEST(SlidingFriction, ClosedForm) {
  PointContact c;
  c.normal_impulse = 20.0 * 0.01 / 10.0;
  c.mu = 0.5;
  const Vec2 p = sliding_friction_impulse(c, {1.0, 0.0});
  EXPECT_NEAR(p.x(), -0.01, 1e-15);
  EXPECT_NEAR(p.y(), 0.0, 1e-15);
  c.mu = 0.0;
  EXPECT_EQ(sliding_friction_impulse(c, {1.0, 0.0}), Vec2::Zero());
}

TEST(SlidingFriction, MaximumDissipation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    PointContact c;
    c.mu = u(rng);
    c.normal_impulse = u(rng);
    const double a = 2.0 * kPi * u(rng);
    const Vec2 d(std::cos(a), std::sin(a));
    const Vec2 p = sliding_friction_impulse(c, d);
    EXPECT_NEAR(p.dot(d), -c.mu * c.normal_impulse, 1e-15);
    EXPECT_NEAR(p.norm(), c.mu * c.normal_impulse, 1e-15);
  }
}

TEST(MotionWrench, PureMomentumWithoutGravityOrFriction) {
  Scene s = sptest::load("scenes/square_prism_mu06.json");
  s.gravity = Vec2::Zero();
  s.fingers.mu = 0.0;
  validate_scene(s);
  const double v = 0.02;
  const ObjectTwist tw{v, 0.0, 0.0};
  const Wrench w = motion_wrench(s, {}, tw, classify_modes(s, {}, tw));
  EXPECT_NEAR(w.x(), s.object.mass * v, 1e-15);
  EXPECT_NEAR(w.y(), 0.0, 1e-15);
  EXPECT_NEAR(w.z(), 0.0, 1e-15);
}

TEST(MotionWrench, TranslationOpposesFrictionAndGravity) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  const auto tw = x_translation(s);
  const Wrench w = motion_wrench(s, {}, tw, classify_modes(s, {}, tw));
  const double friction = s.fingers.mu * 2.0 * s.fingers.grip_force * s.dynamics.dt;
  EXPECT_NEAR(w.x(), friction + s.object.mass * tw.vx, 1e-12);
  EXPECT_NEAR(w.y(), s.object.mass * 9.81 * s.dynamics.dt, 1e-12);
  EXPECT_NEAR(w.z(), 0.0, 1e-15);
}

TEST(MotionWrench, RollingGivesTorqueAndVerticalForceOnly) {
  const Scene s = sptest::load("scenes/disc_rolling.json");
  const auto tw = rotation_about_origin(s, 2.0);
  const Wrench w = motion_wrench(s, {}, tw, classify_modes(s, {}, tw));
  EXPECT_NEAR(w.x(), 0.0, 1e-15);
  EXPECT_GT(w.y(), 0.0);
  EXPECT_GT(std::abs(w.z()), 0.0);
  // The frictional part alone is a pure torque.
  const Wrench f = sliding_finger_wrench(s, {}, classify_modes(s, {}, tw));
  EXPECT_NEAR(f.x(), 0.0, 1e-15);
  EXPECT_NEAR(f.y(), 0.0, 1e-15);
}

TEST(PusherCone, FrictionlessPointPusherIsSingleRay) {
  Scene s = with_pusher_mu(sptest::load("scenes/disc_rolling.json"), 0.0);
  const auto c = pusher_generalized_cone(s, 0);
  ASSERT_EQ(c.generators.size(), 1u);
  EXPECT_NEAR((c.generators[0] - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(cone_rank(c), 1);
}

TEST(PusherCone, ThreePointLinePusherHasSixGenerators) {
  const Scene s = sptest::load("scenes/square_prism_mu02.json");
  const auto c = pusher_generalized_cone(s, 0);
  EXPECT_EQ(c.generators.size(), 6u);
  EXPECT_EQ(cone_rank(c), 3);
}

TEST(PusherCone, HigherFrictionEnlargesCone) {
  const Scene lo = sptest::load("scenes/square_prism_mu02.json");
  const Scene hi = sptest::load("scenes/square_prism_mu06.json");
  const auto a = with_face_normals(pusher_generalized_cone(lo, 0));
  const auto b = with_face_normals(pusher_generalized_cone(hi, 0));
  // Old generators are in the new cone; some new generator is outside the old.
  for (const auto& g : a.generators) EXPECT_LE(max_facet_projection(*b.face_normals, g), 1e-12);
  double outside = 0.0;
  for (const auto& g : b.generators) outside = std::max(outside, max_facet_projection(*a.face_normals, g));
  EXPECT_GT(outside, 1e-3);
}

TEST(StickingPolytope, CenterPointGivesFlatPolygon) {
  const Scene s = sptest::load("scenes/disc_rolling.json");
  const PointContact& c = s.finger_contacts[0];
  const auto p = sticking_finger_polytope(s, std::span(&c, 1));
  ASSERT_EQ(p.polytope.vertices.size(), 16u);
  for (const auto& v : p.polytope.vertices) {
    EXPECT_NEAR(v.z(), 0.0, 1e-18);
    EXPECT_NEAR(Vec2(v.x(), v.y()).norm(), c.mu * c.normal_impulse, 1e-15);
  }
}

TEST(StickingPolytope, ZeroFrictionIsSingleton) {
  Scene s = sptest::load("scenes/disc_rolling.json");
  s.fingers.mu = 0.0;
  validate_scene(s);
  const auto p = sticking_finger_polytope(s, std::span(s.finger_contacts.data(), 3));
  ASSERT_EQ(p.polytope.vertices.size(), 1u);
  EXPECT_EQ(p.polytope.vertices[0], Wrench::Zero());
}

TEST(CheckStablePush, FrictionDecidesTranslationPush) {
  for (const auto& [file, expect] : {std::pair{"scenes/square_prism_mu02.json", false},
                                     std::pair{"scenes/square_prism_mu06.json", true}}) {
    const Scene s = sptest::load(file);
    const PushModel m(s);
    const auto cert = check_stable_push(m, {}, x_translation(s), "bottom");
    EXPECT_EQ(cert.feasible, expect) << file;
    EXPECT_EQ(cert.push_case, PushCase::AllSlide);
    if (cert.feasible) EXPECT_LE(cert.residual, 1e-9);
  }
}

TEST(CheckStablePush, RollingNeedsTheStickingContact) {
  const Scene s = sptest::load("scenes/disc_rolling.json");
  const PushModel m(s);
  const auto tw = rotation_about_origin(s, 2.0);
  const auto full = check_stable_push(m, {}, tw, "ground");
  EXPECT_TRUE(full.feasible);
  EXPECT_EQ(full.push_case, PushCase::StickSlide);
  EXPECT_LE(full.residual, 1e-9);
  ASSERT_EQ(full.sticking_points.size(), 1u);
  const auto slide_only = check_stable_push(m, {}, tw, "ground", {PushCase::AllSlide});
  EXPECT_FALSE(slide_only.feasible);
}

TEST(CheckStablePush, FrictionlessPusherOnlyPushesAlongItsNormal) {
  const Scene s = with_pusher_mu(sptest::load("scenes/square_prism_mu06.json"), 0.0);
  const PushModel m(s);
  EXPECT_FALSE(check_stable_push(m, {}, x_translation(s), "bottom").feasible);
}

TEST(CheckStablePush, UnknownPusherThrows) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  const PushModel m(s);
  EXPECT_THROW(check_stable_push(m, {}, x_translation(s), "nope"), UnknownPusher);
  EXPECT_THROW(check_stable_push(m, {}, ObjectTwist{}, "bottom"), std::invalid_argument);
}

TEST(GraspMaintained, FingerMustStayOnObject) {
  const Scene s = sptest::load("scenes/square_prism_mu06.json");
  EXPECT_TRUE(grasp_maintained(s, {}));
  EXPECT_TRUE(grasp_maintained(s, {40.0, 0.0, 0.0}));
  EXPECT_FALSE(grasp_maintained(s, {46.0, 0.0, 0.0}));
  EXPECT_FALSE(grasp_maintained(s, {0.0, 8.0, 0.0}));
}

// Randomized physics properties over generated scenes.
TEST(PhysicsProperties, ResidualMonotonicityMirrorAndModeConsistency) {
  const auto t = sptest::physics_sweep(2024, 1000);
  EXPECT_EQ(t.residual_failures, 0) << "max residual " << t.max_residual;
  EXPECT_EQ(t.mirror_failures, 0);
  EXPECT_EQ(t.monotonicity_failures, 0);
  EXPECT_EQ(t.consistency_failures, 0);
  EXPECT_GT(t.feasible, 50);
  EXPECT_GT(t.stick_cases, 50);
  EXPECT_GT(t.consistency_checked, 100);
}
