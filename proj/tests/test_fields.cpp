#include <gtest/gtest.h>

#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/fields.hpp"
#include "test_util.hpp"

using namespace glmeissner;
using glmeissner::testing::max_abs;
using glmeissner::testing::random_field;
using glmeissner::testing::random_scalar;

namespace {
MeshPtr small_mesh() { return build_mesh(Ball{1.0}, 0.125, 2); }

double slot_dot(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < a.c[d].size(); ++i) s += a.c[d][i] * b.c[d][i];
  return s;
}
}  // namespace

TEST(Fields, DivCurlIsZero) {
  const MeshPtr m = small_mesh();
  const VectorField a = random_field(m, Storage::kEdge, 7);
  EXPECT_LT(max_abs(divergence(curl(a)).values), 1e-11);
}

TEST(Fields, CurlGradIsZero) {
  const MeshPtr m = small_mesh();
  const VectorField c = curl(gradient(random_scalar(m, 3)));
  for (int d = 0; d < 3; ++d) EXPECT_LT(max_abs(c.c[d]), 1e-11);
}

TEST(Fields, CurlTransposeIsAdjoint) {
  const MeshPtr m = small_mesh();
  const VectorField a = random_field(m, Storage::kEdge, 1);
  const VectorField f = random_field(m, Storage::kFace, 2);
  const double lhs = slot_dot(curl(a), f), rhs = slot_dot(a, curl_transpose(f));
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}

TEST(Fields, GradientOfLinearIsExact) {
  const MeshPtr m = small_mesh();
  const ScalarField s = sample_scalar(m, [](const Vec3& p) { return 2 * p[0] - 3 * p[1] + 0.5 * p[2]; });
  const VectorField g = gradient(s);
  const Grid& grid = m->grid();
  for (Index i = 0; i < grid.size(); ++i) {
    if (grid.has_edge(0, i)) EXPECT_NEAR(g.c[0][i], 2.0, 1e-12);
    if (grid.has_edge(1, i)) EXPECT_NEAR(g.c[1][i], -3.0, 1e-12);
    if (grid.has_edge(2, i)) EXPECT_NEAR(g.c[2][i], 0.5, 1e-12);
  }
}

TEST(Fields, CurlOfRotationField) {
  // A = (-y, x, 0)/2 has curl (0, 0, 1), reproduced exactly on faces.
  const MeshPtr m = small_mesh();
  const VectorField a = sample_field(m, Storage::kEdge, [](const Vec3& p) -> Vec3 { return Vec3(-p[1], p[0], 0) / 2; });
  const VectorField c = curl(a);
  const Grid& g = m->grid();
  for (Index i = 0; i < g.size(); ++i)
    if (g.has_face(2, i)) EXPECT_NEAR(c.c[2][i], 1.0, 1e-12);
}

TEST(Fields, InterpolateLinear) {
  const MeshPtr m = small_mesh();
  auto f = [](const Vec3& p) { return Vec3(p[1] + 1, 2 * p[2], -p[0]); };
  for (Storage s : {Storage::kNode, Storage::kEdge, Storage::kFace}) {
    const VectorField v = sample_field(m, s, f);
    for (const Vec3& p : {Vec3(0.1, 0.2, -0.3), Vec3(0.51, -0.27, 0.05)})
      EXPECT_TRUE(interpolate(v, p).isApprox(f(p), 1e-12)) << storage_name(s);
  }
}

TEST(Fields, IntegrateConstant) {
  const MeshPtr m = build_mesh(Ball{1.0}, 1.0 / 16, 2);
  EXPECT_NEAR(integrate(m, [](const Vec3&) { return 1.0; }), 4 * M_PI / 3, 2e-3);
}

TEST(Fields, MeshMismatch) {
  const MeshPtr a = small_mesh(), b = small_mesh();
  try {
    require_same_mesh(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMeshMismatch);
  }
}

TEST(Fields, OperatorsAreLinear) {
  const MeshPtr m = small_mesh();
  const VectorField f = random_field(m, Storage::kEdge, 11), g = random_field(m, Storage::kEdge, 12);
  const VectorField lhs = curl(2.5 * f + (-1.5) * g);
  const VectorField rhs = 2.5 * curl(f) + (-1.5) * curl(g);
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < lhs.c[d].size(); ++i) EXPECT_NEAR(lhs.c[d][i], rhs.c[d][i], 1e-12 * (1 + std::abs(rhs.c[d][i])));
  const ScalarField a = divergence(2.5 * f + (-1.5) * g), b = divergence(f), c = divergence(g);
  for (size_t i = 0; i < a.values.size(); ++i)
    EXPECT_NEAR(a.values[i], 2.5 * b.values[i] - 1.5 * c.values[i], 1e-11 * (1 + std::abs(a.values[i])));
}

TEST(Fields, SecondOrderConvergence) {
  auto F = [](const Vec3& p) -> Vec3 { return Vec3(std::sin(p[1]) * p[2], std::cos(p[2] + p[0]), p[0] * p[1] * p[1]); };
  auto curlF = [](const Vec3& p) -> Vec3 {
    return Vec3(2 * p[0] * p[1] + std::sin(p[2] + p[0]), std::sin(p[1]) - p[1] * p[1],
                -std::sin(p[2] + p[0]) - std::cos(p[1]) * p[2]);
  };
  auto divF = [](const Vec3& p) { return 0.0 * p[0]; };
  std::vector<double> curl_err, div_err;
  for (double h : {0.1, 0.05}) {
    const MeshPtr m = build_mesh(Ball{1.0}, h, 1);
    const Grid& g = m->grid();
    // Node-centred central differences: sample at edges, evaluate curl on faces.
    const VectorField c = curl(sample_field(m, Storage::kEdge, F));
    double e = 0.0;
    for (int d = 0; d < 3; ++d)
      for (Index i = 0; i < g.size(); ++i)
        if (g.has_face(d, i) && m->face_weight(d, i) >= 1.0)
          e = std::max(e, std::abs(c.c[d][i] - curlF(slot_position(g, Storage::kFace, d, i))[d]));
    curl_err.push_back(e);
    // Divergence of a smooth face field on cells.
    auto G = [](const Vec3& p) -> Vec3 { return Vec3(std::sin(p[0]), p[1] * p[2], std::exp(p[2])); };
    const ScalarField dv = divergence(sample_field(m, Storage::kFace, G));
    double ed = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      if (!g.has_cell(i)) continue;
      const Vec3 q = g.position(i) + Vec3::Constant(h / 2);
      if (q.norm() > 0.8) continue;
      ed = std::max(ed, std::abs(dv[i] - (std::cos(q[0]) + q[2] + std::exp(q[2]) + divF(q))));
    }
    div_err.push_back(ed);
  }
  EXPECT_GE(std::log2(curl_err[0] / curl_err[1]), 1.8);
  EXPECT_GE(std::log2(div_err[0] / div_err[1]), 1.8);
}

TEST(Fields, CovariantGradient) {
  const MeshPtr m = small_mesh();
  const double h = m->spacing();
  const ComplexField one(m, Complex(1.0, 0.0));
  const EdgeComplexField z = covariant_gradient(one, VectorField(m, Storage::kEdge));
  for (int d = 0; d < 3; ++d)
    for (const Complex& v : z.c[d]) EXPECT_EQ(v, Complex(0.0, 0.0));
  const double k = 2.0;
  const ComplexField u = sample_complex(m, [&](const Vec3& p) { return std::polar(1.0, k * p[0]); });
  const VectorField a = sample_field(m, Storage::kEdge, [&](const Vec3&) { return Vec3(k, 0, 0); });
  const EdgeComplexField du = covariant_gradient(u, a);
  for (const Complex& v : du.c[0]) EXPECT_LE(std::abs(v), k * k * h);
}

TEST(Fields, OddIntegrandVanishes) {
  const MeshPtr m = build_mesh(Ball{1.0}, 0.05, 1);
  EXPECT_NEAR(integrate(m, [](const Vec3&) { return 1.0; }), 4 * M_PI / 3, 0.03 * 4 * M_PI / 3);
  EXPECT_NEAR(integrate(m, [](const Vec3& p) { return p[0]; }), 0.0, 1e-10 * double(m->grid().size()));
}

TEST(Fields, WrongStorage) {
  const MeshPtr m = small_mesh();
  try {
    curl_transpose(VectorField(m, Storage::kEdge));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongStorage);
  }
}
