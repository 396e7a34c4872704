#include <gtest/gtest.h>

#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"
#include "glmeissner/normstar.hpp"

using namespace glmeissner;

namespace {

RatioGraph toy(const std::vector<UndirectedEdge>& edges, int nodes) {
  std::vector<Vec3> pos(nodes);
  for (int k = 0; k < nodes; ++k) pos[k] = Vec3(k, 0, 0);
  return make_ratio_graph(pos, std::vector<std::uint8_t>(nodes, 0), -1, edges);
}

double cycle_ratio(const RatioGraph& g, const std::vector<std::int32_t>& c) {
  double w = 0.0, l = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    const std::int32_t p = c[k], q = c[(k + 1) % c.size()];
    bool found = false;
    for (std::int64_t e = g.offset[p]; e < g.offset[p + 1]; ++e)
      if (g.target[e] == q) {
        w += g.w[e];
        l += g.len[e];
        found = true;
        break;
      }
    EXPECT_TRUE(found);
  }
  return w / l;
}

CurveCurrent diameter(double R) {
  CurveCurrent c;
  c.vertices = {Vec3(0, 0, -R), Vec3(0, 0, R)};
  c.endpoints_on_boundary = true;
  return c;
}

VectorFunction ball_field(double R) {
  return [R](const Vec3& p) { return ball_b0_formula(R, p); };
}

}  // namespace

TEST(RatioCycle, Triangle) {
  const RatioGraph g = toy({{0, 1, 3, 1}, {1, 2, 1, 1}, {2, 0, -1, 1}}, 3);
  const CycleResult r = max_ratio_cycle(g, 1e-6);
  EXPECT_NEAR(r.value, 1.0, 1e-6);
  EXPECT_EQ(r.cycle.size(), 3u);
  EXPECT_NEAR(cycle_ratio(g, r.cycle), 1.0, 1e-12);
  EXPECT_TRUE(r.certified);
}

TEST(RatioCycle, PicksBestOfTwo) {
  const RatioGraph g = toy({{0, 1, 0.5, 1}, {1, 2, 0.5, 1}, {2, 0, 0.5, 1}, {3, 4, 0.8, 1}, {4, 5, 0.8, 1}, {5, 3, 0.8, 1}}, 6);
  const CycleResult r = max_ratio_cycle(g, 1e-6);
  EXPECT_NEAR(r.value, 0.8, 1e-6);
  for (std::int32_t v : r.cycle) EXPECT_GE(v, 3);
}

TEST(RatioCycle, Antisymmetry) {
  const RatioGraph g = toy({{0, 1, 0.3, 1}, {1, 2, -0.7, 2}, {0, 2, 1.1, 1.5}}, 3);
  for (std::int32_t p = 0; p < g.node_count(); ++p)
    for (std::int64_t e = g.offset[p]; e < g.offset[p + 1]; ++e) {
      const std::int32_t q = g.target[e];
      for (std::int64_t f = g.offset[q]; f < g.offset[q + 1]; ++f)
        if (g.target[f] == p) {
          EXPECT_EQ(g.w[f], -g.w[e]);
          EXPECT_EQ(g.len[f], g.len[e]);
        }
    }
}

TEST(RatioCycle, ZeroWeights) {
  const RatioGraph g = toy({{0, 1, 0, 1}, {1, 2, 0, 1}, {2, 0, 0, 1}}, 3);
  const CycleResult r = max_ratio_cycle(g, 1e-6);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.cycle.empty());
}

TEST(RatioGraphBuild, ConstantFieldWeights) {
  const MeshPtr mesh = build_mesh(Box{2, 2, 2}, 0.5, 1);
  const RatioGraph g = build_ratio_graph(mesh, [](const Vec3&) { return Vec3(0, 0, 1); });
  for (std::int32_t p = 0; p < g.node_count(); ++p) {
    if (p == g.hub) continue;
    for (std::int64_t e = g.offset[p]; e < g.offset[p + 1]; ++e) {
      const std::int32_t q = g.target[e];
      if (q == g.hub) {
        EXPECT_EQ(g.w[e], 0.0);
        EXPECT_EQ(g.len[e], 0.0);
        continue;
      }
      EXPECT_NEAR(g.w[e], g.pos[q][2] - g.pos[p][2], 1e-12);
      EXPECT_NEAR(g.len[e], (g.pos[q] - g.pos[p]).norm(), 1e-12);
    }
  }
}

TEST(NormStar, ConstantFieldOnBox) {
  const MeshPtr mesh = build_mesh(Box{2, 2, 2}, 0.25, 1);
  const NormStarResult r = norm_star(mesh, [](const Vec3&) { return Vec3(0, 0, 1); }, 1e-6);
  EXPECT_NEAR(r.value, 1.0, 1e-6);
  EXPECT_FALSE(r.curve.closed);
  EXPECT_NO_THROW(r.curve.validate(*mesh));
}

TEST(NormStar, ZeroField) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.25, 1);
  const NormStarResult r = norm_star(mesh, [](const Vec3&) { return Vec3::Zero(); });
  EXPECT_EQ(r.value, 0.0);
}

TEST(NormStar, BallDiameter) {
  const double h = 1.0 / 8;
  const MeshPtr mesh = build_mesh(Ball{1.0}, h, 1);
  const double tol = 1e-5;
  const NormStarResult r = norm_star(mesh, ball_field(1.0), tol);
  const double exact = ball_norm_star_exact(1.0);
  EXPECT_NEAR(r.value, exact, 0.05 * exact);
  EXPECT_LE(hausdorff_distance(r.curve, diameter(1.0), h / 4), 2 * h);
  // Self-consistency and the maximality certificate.
  EXPECT_NEAR(r.value, line_integral(ball_field(1.0), r.curve) / r.curve.length(), 1e-12);
  EXPECT_NEAR(r.value, r.graph_value, tol);
  EXPECT_TRUE(r.search.certified);
  EXPECT_NO_THROW(r.curve.validate(*mesh));

  // Orientation and scaling.
  const NormStarResult neg = norm_star(mesh, [](const Vec3& p) { return Vec3(-ball_b0_formula(1.0, p)); }, tol);
  EXPECT_NEAR(neg.value, r.value, tol);
  EXPECT_LE(hausdorff_distance(neg.curve, r.curve, h / 4), 1e-9);
  EXPECT_NEAR(line_integral(ball_field(1.0), neg.curve), -r.integral, 1e-9);
  const NormStarResult scaled = norm_star(mesh, [](const Vec3& p) { return Vec3(3.0 * ball_b0_formula(1.0, p)); }, tol);
  EXPECT_NEAR(scaled.value, 3.0 * r.value, 3 * tol);
  EXPECT_LE(hausdorff_distance(scaled.curve, r.curve, h / 4), 1e-9);
}

TEST(NormStar, RefinementMonotone) {
  const double v8 = norm_star(build_mesh(Ball{1.0}, 1.0 / 6, 1), ball_field(1.0)).value;
  const double v16 = norm_star(build_mesh(Ball{1.0}, 1.0 / 12, 1), ball_field(1.0)).value;
  EXPECT_GE(v16, v8 - 0.02);
}

TEST(NormStar, HalfDisc) {
  EXPECT_NEAR(norm_star_halfdisc(1.0, 64), ball_norm_star_exact(1.0), 0.05 * ball_norm_star_exact(1.0));
  EXPECT_NEAR(norm_star_halfdisc(0.25, 64), ball_norm_star_exact(0.25), 0.05 * ball_norm_star_exact(0.25));
  const HalfDiscResult r = norm_star_halfdisc_full(1.0, 64);
  ASSERT_FALSE(r.curve.empty());
  for (const Eigen::Vector2d& v : r.curve) EXPECT_LT(std::abs(v[0]), 1.0 / 64 + 1e-12);
  EXPECT_THROW(norm_star_halfdisc(-1.0, 64), Error);
}

TEST(Curve, LineIntegralAndOrientation) {
  CurveCurrent c;
  c.vertices = {Vec3(0, 0, -0.5), Vec3(0, 0, 0.0), Vec3(0, 0, 0.7)};
  const VectorFunction ez = [](const Vec3&) { return Vec3(0, 0, 1); };
  EXPECT_NEAR(line_integral(ez, c), 1.2, 1e-15);
  EXPECT_NEAR(line_integral(ez, c.reversed()), -1.2, 1e-15);
  EXPECT_NEAR(c.length(), 1.2, 1e-15);
}

TEST(Curve, OutsideDomain) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.25, 1);
  CurveCurrent c;
  c.vertices = {Vec3(0, 0, -1.5), Vec3(0, 0, 1)};
  c.endpoints_on_boundary = true;
  try {
    require_curve_in_domain(*mesh, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCurveOutsideDomain);
  }
}

TEST(Curve, DiameterPairingWithBallField) {
  CurveCurrent c;
  for (int k = 0; k <= 4000; ++k) c.vertices.push_back(Vec3(0, 0, -1.0 + 2.0 * k / 4000));
  EXPECT_NEAR(line_integral(ball_field(1.0), c), 2 * ball_norm_star_exact(1.0), 1e-7);
  EXPECT_NEAR(line_integral(ball_field(1.0), c), 0.301096, 5e-6);
}
