#include "stablepush/cone.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stablepush;

namespace {

WrenchCone cone_of(std::vector<Vec3> g) { return WrenchCone{std::move(g), std::nullopt}; }

using sptest::lifted_residual;
using sptest::scaled_about_centroid;

}  // namespace

TEST(Lp, SolvesSmallProgram) {
  // max x0 + x1 s.t. x0 + 2 x1 + s0 = 4, 3 x0 + x1 + s1 = 6.
  Eigen::MatrixXd A(2, 4);
  A << 1, 2, 1, 0, 3, 1, 0, 1;
  Eigen::VectorXd b(2), c(4);
  b << 4, 6;
  c << 1, 1, 0, 0;
  const auto r = lp::solve(A, b, c);
  ASSERT_EQ(r.status, lp::Status::Optimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
  EXPECT_NEAR(r.objective, 2.8, 1e-12);
}

TEST(Lp, ReportsInfeasibleAndUnbounded) {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd b(1), c(2);
  b << -1;
  c << 0, 0;
  EXPECT_EQ(lp::solve(A, b, c).status, lp::Status::Infeasible);
  A << 1, -1;
  b << 0;
  c << 1, 0;
  EXPECT_EQ(lp::solve(A, b, c).status, lp::Status::Unbounded);
}

TEST(ConicalSum, ZeroConeIsIdentity) {
  const WrenchCone a = cone_of({{1, 0, 0}, {0, 1, 0}});
  const WrenchCone zero;
  const std::vector<WrenchCone> parts{a, zero};
  EXPECT_EQ(conical_sum(parts).generators, a.generators);
}

TEST(ConicalSum, UnionsGenerators) {
  const std::vector<WrenchCone> parts{cone_of({{1, 0, 0}, {0, 1, 0}}), cone_of({{0, 0, 1}, {1, 1, 1}})};
  EXPECT_EQ(conical_sum(parts).generators.size(), 4u);
}

TEST(ConicalSum, RandomCombinationsAreMembers) {
  std::mt19937_64 rng(11);
  const auto ga = sptest::random_pointed_cone(rng, 3, 0.6);
  const auto gb = sptest::random_pointed_cone(rng, 4, 0.6);
  const std::vector<WrenchCone> parts{cone_of(ga), cone_of(gb)};
  const auto sum = with_face_normals(conical_sum(parts));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    Vec3 w = Vec3::Zero();
    for (const auto& g : sum.generators) w += u(rng) * g;
    ASSERT_TRUE(cone_contains(sum, w, 1e-9));
  }
}

TEST(FaceNormals, OrthantHasAxisNormals) {
  const auto n = face_normals(cone_of({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  ASSERT_EQ(n.size(), 3u);
  for (const Vec3& e : {Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, -1)}) {
    bool found = false;
    for (const auto& f : n) found = found || (f.normalized() - e).norm() < 1e-12;
    EXPECT_TRUE(found) << e.transpose();
  }
}

TEST(FaceNormals, SingleRayIsDegenerate) {
  EXPECT_THROW(face_normals(cone_of({{1, 2, 3}})), DegenerateCone);
  EXPECT_THROW(face_normals(cone_of({{1, 0, 0}, {0, 1, 0}})), DegenerateCone);
}

TEST(FaceNormals, GeneratorsLieInsideEveryFacet) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = sptest::random_pointed_cone(rng, 3 + trial % 8, 0.8);
    const auto normals = face_normals(cone_of(g));
    for (const auto& n : normals) {
      for (const auto& gi : g) ASSERT_LE(n.dot(gi) / gi.norm(), 1e-9);
    }
  }
}

TEST(FaceNormals, AgreeWithLpMembership) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = sptest::random_pointed_cone(rng, 4 + trial % 6, 0.7);
    const auto cone = with_face_normals(cone_of(g));
    for (int i = 0; i < 100; ++i) {
      const Vec3 w = sptest::random_direction(rng);
      if (std::abs(max_facet_projection(*cone.face_normals, w)) < 1e-7) continue;
      ASSERT_EQ(max_facet_projection(*cone.face_normals, w) <= 1e-9, cone_membership_lp(cone, w).feasible);
      ++checked;
    }
  }
  EXPECT_GT(checked, 9000);
}

TEST(ConeContains, ApexIsMember) {
  EXPECT_TRUE(cone_contains(cone_of({{1, 0, 0}}), Vec3::Zero()));
  EXPECT_TRUE(cone_contains(WrenchCone{}, Vec3::Zero()));
}

TEST(ConeContains, ScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(1e-4, 1e4);
  for (int trial = 0; trial < 500; ++trial) {
    const auto cone = with_face_normals(cone_of(sptest::random_pointed_cone(rng, 5, 0.7)));
    const Vec3 w = sptest::random_direction(rng);
    const double lam = s(rng);
    EXPECT_EQ(cone_contains(cone, w), cone_contains(cone, lam * w));
  }
}

TEST(ConeContains, AgreesWithNnlsOracle) {
  const auto t = sptest::membership_sweep(13, 10000);
  EXPECT_EQ(t.disagreements, 0) << "first at trial " << t.first_disagreement;
  EXPECT_GT(t.checked, 9000);
  EXPECT_GT(t.positives, 500);
}

TEST(ConeContains, DegenerateConeContainsOnlyItsSpan) {
  const WrenchCone ray = cone_of({{0, 1, 0.5}});
  EXPECT_TRUE(cone_contains(ray, {0, 2, 1}));
  EXPECT_FALSE(cone_contains(ray, {0, -2, -1}));
  EXPECT_FALSE(cone_contains(ray, {0.01, 2, 1}));
  const WrenchCone fan = cone_of({{1, 0, 0}, {0, 1, 0}});
  EXPECT_TRUE(cone_contains(fan, {1, 1, 0}));
  EXPECT_FALSE(cone_contains(fan, {1, 1, 1e-3}));
}

TEST(ConeContains, MonotoneUnderGeneratorInclusion) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gb = sptest::random_pointed_cone(rng, 6, 0.8);
    std::vector<Vec3> ga;
    for (int i = 0; i < 4; ++i) {
      Vec3 w = Vec3::Zero();
      for (const auto& g : gb) w += u(rng) * g;
      ga.push_back(w);
    }
    const auto a = cone_of(ga);
    const auto b = cone_of(gb);
    for (int i = 0; i < 20; ++i) {
      const Vec3 w = sptest::random_direction(rng);
      if (cone_contains(a, w)) EXPECT_TRUE(cone_contains(b, w));
    }
  }
}

TEST(MembershipLp, MarginIsPositiveInsideAndWitnessReconstructs) {
  const WrenchCone c = cone_of({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const auto q = cone_membership_lp(c, {1, 2, 3});
  ASSERT_TRUE(q.feasible);
  EXPECT_GT(q.margin, 0.1);
  Vec3 r = Vec3::Zero();
  for (int j = 0; j < 3; ++j) r += q.coefficients(j) * c.generators[static_cast<std::size_t>(j)];
  EXPECT_NEAR((r - Vec3(1, 2, 3)).norm(), 0.0, 1e-12);
  const auto edge = cone_membership_lp(c, {1, 2, 0});
  ASSERT_TRUE(edge.feasible);
  EXPECT_NEAR(edge.margin, 0.0, 1e-12);
}

TEST(Minkowski, TranslatesVertices) {
  WrenchPolytope cube;
  for (int i = 0; i < 8; ++i) cube.vertices.push_back(Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  EXPECT_EQ(minkowski_sum_point_polytope(Vec3::Zero(), cube).vertices, cube.vertices);
  const Vec3 w(1, -2, 0.5);
  const auto moved = minkowski_sum_point_polytope(w, cube);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(moved.vertices[i], cube.vertices[i] + w);
}

TEST(Intersection, ApexSingletonAlwaysIntersects) {
  const WrenchPolytope zero{{Vec3::Zero()}};
  EXPECT_TRUE(polytope_cone_intersects(zero, cone_of({{1, 0, 0}})));
  EXPECT_TRUE(polytope_cone_intersects(zero, WrenchCone{}));
  EXPECT_THROW(polytope_cone_intersects(WrenchPolytope{}, cone_of({{1, 0, 0}})), std::invalid_argument);
}

TEST(Intersection, AgreesWithLiftedNnlsOracle) {
  const auto t = sptest::intersection_sweep(19, 10000);
  EXPECT_EQ(t.disagreements, 0) << "first at trial " << t.first_disagreement;
  EXPECT_GT(t.checked, 9000);
  EXPECT_GT(t.positives, 500);
}

TEST(Intersection, SampledInteriorPointsConfirmPositives) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 1.0);
  std::gamma_distribution<double> gam(1.0, 1.0);
  int confirmed = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = sptest::random_pointed_cone(rng, 3 + trial % 4, 0.6);
    const auto cone = with_face_normals(cone_of(g));
    std::vector<Vec3> verts;
    const Vec3 center = 2.0 * sptest::random_direction(rng);
    for (int i = 0; i < 5; ++i) verts.push_back(center + 1.0 * Vec3(n(rng), n(rng), n(rng)));
    bool sampled = false;
    for (int s = 0; s < 2000 && !sampled; ++s) {
      Vec3 p = Vec3::Zero();
      double tot = 0.0;
      for (const auto& v : verts) {
        const double l = gam(rng);
        p += l * v;
        tot += l;
      }
      sampled = max_facet_projection(*cone.face_normals, p / tot) < -1e-6;
    }
    // A sampled interior witness is a proof of intersection.
    if (sampled) {
      ASSERT_TRUE(polytope_cone_intersects(WrenchPolytope{verts}, cone));
      ++confirmed;
    }
  }
  EXPECT_GT(confirmed, 20);
}

TEST(Intersection, InvariantUnderInPlaneForceRotation) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = sptest::random_pointed_cone(rng, 4, 0.6);
    std::vector<Vec3> verts;
    const Vec3 center = 2.0 * sptest::random_direction(rng);
    for (int i = 0; i < 4; ++i) verts.push_back(center + 0.7 * Vec3(n(rng), n(rng), n(rng)));
    const bool lo = lifted_residual(scaled_about_centroid(verts, 0.999), g) < 1e-10;
    const bool hi = lifted_residual(scaled_about_centroid(verts, 1.001), g) < 1e-10;
    if (lo != hi) continue;
    const double a = ang(rng);
    auto rot = [a](const Vec3& w) {
      const Vec2 f = rotate(Vec2(w.x(), w.y()), a);
      return Vec3(f.x(), f.y(), w.z());
    };
    std::vector<Vec3> g2, v2;
    for (const auto& x : g) g2.push_back(rot(x));
    for (const auto& x : verts) v2.push_back(rot(x));
    EXPECT_EQ(polytope_cone_intersects(WrenchPolytope{verts}, cone_of(g)),
              polytope_cone_intersects(WrenchPolytope{v2}, cone_of(g2)));
  }
}

TEST(ConvexHull, DetectsInteriorAndExteriorPoints) {
  const std::vector<Vec3> tet{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_TRUE(in_convex_hull(Vec3(0.2, 0.2, 0.2), tet));
  EXPECT_FALSE(in_convex_hull(Vec3(0.5, 0.5, 0.5), tet));
}
