#include <gtest/gtest.h>

#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"

using namespace glmeissner;

namespace {

// Independent oracle: power series of int_0^R sinh r / r dr.
double series_norm_star(double R) {
  double sum = 0.0, term = R;  // R^{2k+1} / (2k+1)!
  for (int k = 0; k < 40; ++k) {
    sum += term / (2 * k + 1);
    term *= R * R / ((2 * k + 2) * (2 * k + 3));
  }
  return 1.5 * (1.0 - sum / std::sinh(R));
}

Vec3 uniform_z(const Vec3&) { return Vec3(0, 0, 1); }

double ball_error(const MeshPtr& mesh, const MeissnerData& md, double R) {
  double e2 = 0.0, b2 = 0.0;
  for (Index i : mesh->interior_nodes()) {
    const Vec3 ref = analytic_ball_B0(R, mesh->grid().position(i));
    e2 += mesh->node_weight(i) * (md.applied_norm * md.B0.at(i) - ref).squaredNorm();
    b2 += mesh->node_weight(i) * ref.squaredNorm();
  }
  return std::sqrt(e2 / b2);
}

LondonOptions continuum_only() {
  LondonOptions o;
  o.lattice = false;
  return o;
}

}  // namespace

TEST(BallOracle, NormStarMatchesSeries) {
  EXPECT_NEAR(ball_norm_star_exact(1.0), series_norm_star(1.0), 1e-9);
  EXPECT_NEAR(ball_norm_star_exact(1.0), 0.1505482, 1e-6);
  EXPECT_NEAR(ball_norm_star_exact(0.25), series_norm_star(0.25), 1e-9);
  const double small = ball_norm_star_exact(0.01);
  EXPECT_GE(small, 1.6e-5);
  EXPECT_LE(small, 1.7e-5);
  const double big = ball_norm_star_exact(50.0);
  EXPECT_GT(big, 1.40);
  EXPECT_LT(big, 1.50);
}

TEST(BallOracle, NormStarIncreasingAndBounded) {
  double prev = 0.0;
  for (double R = 0.1; R <= 30.0; R *= 1.3) {
    const double v = ball_norm_star_exact(R);
    EXPECT_GT(v, prev);
    EXPECT_LT(v, 1.5);
    prev = v;
  }
  EXPECT_THROW(ball_norm_star_exact(0.0), Error);
}

TEST(BallOracle, DiameterIntegral) {
  // int_{-R}^{R} B0(0,0,z).z dz = 2R norm_star.
  for (double R : {0.5, 1.0, 2.0}) {
    const int n = 4000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double z = -R + (k + 0.5) * 2 * R / n;
      s += analytic_ball_B0(R, Vec3(0, 0, z))[2] * 2 * R / n;
    }
    EXPECT_NEAR(s, 2 * R * ball_norm_star_exact(R), 1e-6 * R);
  }
}

TEST(BallOracle, CentreAndAxisymmetry) {
  const Vec3 c = analytic_ball_B0(1.0, Vec3::Zero());
  EXPECT_TRUE(c.allFinite());
  EXPECT_NEAR(c[0], 0.0, 1e-14);
  EXPECT_NEAR(c[1], 0.0, 1e-14);
  EXPECT_NEAR(c[2], analytic_ball_B0(1.0, Vec3(0, 0, 1e-4))[2], 1e-7);
  const Vec3 p(0.3, 0.1, -0.4);
  for (double th : {0.3, 1.7, 4.0}) {
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(th, Vec3::UnitZ()).toRotationMatrix();
    EXPECT_LT((analytic_ball_B0(1.0, rot * p) - rot * analytic_ball_B0(1.0, p)).norm(), 1e-12);
  }
  EXPECT_THROW(analytic_ball_B0(1.0, Vec3(1.1, 0, 0)), Error);
}

TEST(BallOracle, SolvesHelmholtz) {
  // (-Laplace + 1) B0 = kappa z inside, div B0 = 0, B0 x nu = 0 on the sphere.
  const double R = 1.0, d = 1e-3;
  const Vec3 p(0.2, -0.3, 0.4);
  Vec3 lap = -6.0 * analytic_ball_B0(R, p);
  double div = 0.0;
  for (int a = 0; a < 3; ++a) {
    const Vec3 e = d * Vec3::Unit(a);
    lap += analytic_ball_B0(R, p + e) + analytic_ball_B0(R, p - e);
    div += (analytic_ball_B0(R, p + e)[a] - analytic_ball_B0(R, p - e)[a]) / (2 * d);
  }
  lap /= d * d;
  EXPECT_LT((analytic_ball_B0(R, p) - lap - ball_kappa(R) * Vec3::UnitZ()).norm(), 1e-4);
  EXPECT_NEAR(div, 0.0, 1e-8);
  for (const Vec3& q : {Vec3(1, 0, 0), Vec3(0.6, 0, 0.8), Vec3(0, 0.28, -0.96)})
    EXPECT_LT(analytic_ball_B0(R, q).cross(q).norm(), 1e-12);
}

TEST(BallOracle, CurlYComponent) {
  EXPECT_DOUBLE_EQ(curl_b0_y_component(1.0, 0.5, 0.0), 0.0);
  EXPECT_NEAR(curl_b0_y_component(1.0, 1e-8, M_PI / 2), 0.0, 1e-7);
  const double f = 1.5 / std::sinh(1.0) * (std::cosh(0.5) - std::sinh(0.5) / 0.5);
  EXPECT_NEAR(curl_b0_y_component(1.0, 0.5, M_PI / 2), f / 0.5, 1e-12);
  for (double r = 0.05; r <= 1.0; r += 0.05)
    for (double phi = 0.0; phi <= M_PI; phi += M_PI / 16) EXPECT_GE(curl_b0_y_component(1.0, r, phi), 0.0);
  // Consistent with the Cartesian curl in the xz half plane (phi from the z axis).
  const double r = 0.6, phi = 1.1;
  const Vec3 p(r * std::sin(phi), 0.0, r * std::cos(phi));
  EXPECT_NEAR(ball_curl_b0(1.0, p)[1], curl_b0_y_component(1.0, r, phi), 1e-12);
}

TEST(BallOracle, Hc1Leading) {
  EXPECT_NEAR(hc1_leading(1.0 / M_E, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(hc1_leading(1e-3, 0.1505482), std::log(1e3) / (2 * 0.1505482), 1e-12);
  EXPECT_NEAR(hc1_leading(1e-3, 0.1505482), 22.94, 0.01);
  try {
    hc1_leading(1.0, 0.15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEpsilon);
  }
  try {
    hc1_leading(0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveNormStar);
  }
}

TEST(London, ZeroData) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.25, 2);
  LondonOptions o = continuum_only();
  o.normalize = false;
  const MeissnerData md = solve_london(mesh, [](const Vec3&) { return Vec3::Zero(); }, o);
  for (int d = 0; d < 3; ++d)
    for (double v : md.B0.c[d]) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(md.J0_full_space, 0.0);
}

TEST(London, NormalizedField) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.125, 2);
  const MeissnerData md = solve_london(mesh, uniform_z, continuum_only());
  EXPECT_NEAR(norm_l2(md.H0ex), 1.0, 1e-6);
  EXPECT_NEAR(md.applied_norm, std::sqrt(4 * M_PI / 3), 2e-3);
  EXPECT_LE(md.residual_norm, 1e-8);
}

TEST(London, BallConvergence) {
  const MeshPtr m8 = build_mesh(Ball{1.0}, 1.0 / 8, 2), m16 = build_mesh(Ball{1.0}, 1.0 / 16, 2);
  const double e8 = ball_error(m8, solve_london(m8, uniform_z, continuum_only()), 1.0);
  const MeissnerData md16 = solve_london(m16, uniform_z, continuum_only());
  const double e16 = ball_error(m16, md16, 1.0);
  EXPECT_LT(e16, 0.05);
  EXPECT_GE(e8 / e16, 3.0);
  EXPECT_LT(md16.div_l2, 0.01);
  EXPECT_LT(md16.tangential_max, 1e-3);
  // J0 of the normalized problem against the closed form.
  const double j0 = ball_J0_exact(1.0) / (md16.applied_norm * md16.applied_norm);
  EXPECT_NEAR(md16.J0_full_space, j0, 0.01 * j0);
}

TEST(London, RadiusTwo) {
  const MeshPtr m = build_mesh(Ball{2.0}, 2.0 / 8, 2);
  EXPECT_LT(ball_error(m, solve_london(m, uniform_z, continuum_only()), 2.0), 0.05);
}

TEST(London, Linearity) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.125, 2);
  LondonOptions o = continuum_only();
  o.normalize = false;
  o.tol = 1e-12;
  const MeissnerData a = solve_london(mesh, uniform_z, o);
  const MeissnerData b = solve_london(mesh, [](const Vec3&) { return Vec3(0, 0, -2.5); }, o);
  double worst = 0.0, scale = 0.0;
  for (Index i : mesh->interior_nodes()) {
    worst = std::max(worst, (b.B0.at(i) + 2.5 * a.B0.at(i)).norm());
    scale = std::max(scale, a.B0.at(i).norm());
  }
  EXPECT_LT(worst, 1e-8 * scale);
}

TEST(London, LatticeMatchesContinuumEnergy) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 1.0 / 12, 6);
  const MeissnerData md = solve_london(mesh, uniform_z);
  ASSERT_TRUE(md.has_lattice);
  ASSERT_TRUE(md.has_continuum);
  EXPECT_NEAR(md.J0, md.J0_full_space, 0.05 * md.J0_full_space);
  EXPECT_NEAR(md.lattice.kinetic + md.lattice.field, md.J0, 1e-12 * md.J0);
}

TEST(London, MeshTooCoarse) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.6, 2);
  try {
    solve_london(mesh, uniform_z, continuum_only());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMeshTooCoarse);
  }
}
