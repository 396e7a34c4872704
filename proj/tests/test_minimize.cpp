#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glmeissner/app.hpp"
#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"
#include "glmeissner/minimize.hpp"
#include "test_util.hpp"

using namespace glmeissner;

namespace {

struct MinimizeFixture : ::testing::Test {
  static void SetUpTestSuite() {
    mesh = build_mesh(Ball{1.0}, 0.125, 2);
    LondonOptions o;
    o.continuum = false;
    md = std::make_shared<const MeissnerData>(solve_london(mesh, [](const Vec3&) { return Vec3(0, 0, 1); }, o));
  }
  static void TearDownTestSuite() {
    md.reset();
    mesh.reset();
  }
  static GLState generic_state(double hex = 3.0, double eps = 0.2) {
    GLState s = meissner_state(mesh, md, eps, hex);
    s.u = sample_complex(mesh, [](const Vec3& p) { return splitcheck_u(Ball{1.0}, p); });
    s.A = glmeissner::testing::random_field(mesh, Storage::kEdge, 3, 0.3);
    return s;
  }
  static double hc1(double eps) {
    // Leading-order field of the normalized problem, from the exact ball value.
    const double norm = ball_norm_star_exact(1.0) / std::sqrt(4 * M_PI / 3);
    return hc1_leading(eps, norm);
  }
  static inline MeshPtr mesh;
  static inline std::shared_ptr<const MeissnerData> md;
};

using Minimize = MinimizeFixture;

CurveCurrent z_diameter(const DomainMesh& mesh, bool up = true) {
  CurveCurrent c;
  c.vertices = {Vec3(0, 0, -1), Vec3(0, 0, 1)};
  if (!up) std::swap(c.vertices[0], c.vertices[1]);
  c.endpoints_on_boundary = true;
  return offset_curve(mesh, c);
}

}  // namespace

TEST_F(Minimize, GradientMatchesFiniteDifferences) {
  const GLState s = generic_state();
  const EnergyGradient g = energy_gradient(s);
  EXPECT_DOUBLE_EQ(g.energy, gl_total_energy(s).total);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const double t = 1e-5;
  for (int dir = 0; dir < 20; ++dir) {
    ComplexField du(mesh);
    VectorField dA(mesh, Storage::kEdge);
    double analytic = 0.0;
    for (Index i = 0; i < mesh->grid().size(); ++i) {
      if (!node_active(*mesh, i)) continue;
      du[i] = Complex(n(rng), n(rng));
      analytic += g.du[i].real() * du[i].real() + g.du[i].imag() * du[i].imag();
    }
    for (int d = 0; d < 3; ++d)
      for (Index i = 0; i < mesh->grid().size(); ++i)
        if (mesh->grid().has_edge(d, i)) {
          dA.c[d][i] = n(rng);
          analytic += g.dA.c[d][i] * dA.c[d][i];
        }
    auto shifted = [&](double a) {
      GLState x = s;
      for (size_t i = 0; i < x.u.values.size(); ++i) x.u.values[i] += a * du.values[i];
      x.A.axpy(a, dA);
      return gl_total_energy(x).total;
    };
    const double fd = (shifted(t) - shifted(-t)) / (2 * t);
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::abs(analytic)) << "direction " << dir;
  }
}

TEST_F(Minimize, StationaryAtUnitModulus) {
  const GLState s = meissner_state(mesh, md, 0.1, 0.0);
  const EnergyGradient g = energy_gradient(s);
  for (Index i : mesh->interior_nodes()) EXPECT_EQ(g.du[i], Complex(0.0, 0.0));
  for (int d = 0; d < 3; ++d)
    for (double v : g.dA.c[d]) EXPECT_EQ(v, 0.0);
}

TEST_F(Minimize, MeissnerStartAtZeroFieldStays) {
  MinimizeOptions o;
  o.max_iters = 20;
  const MinimizeResult r = minimize(meissner_state(mesh, md, 0.1, 0.0), o);
  EXPECT_EQ(r.energy, 0.0);
  EXPECT_TRUE(r.converged);
  for (const Complex& z : r.state.u.values) EXPECT_EQ(z, Complex(1.0, 0.0));
}

TEST_F(Minimize, VortexlessBelowLeadingField) {
  const double eps = 0.25, hex = 0.5 * hc1(eps);
  for (std::uint64_t seed : {1u, 2u}) {
    MinimizeOptions o;
    o.max_iters = 300;
    o.grad_tol = 1e-3;
    o.record_history = true;
    const GLState start = perturbed_state(meissner_state(mesh, md, eps, hex), 0.1, seed);
    const MinimizeResult r = minimize(start, o);
    EXPECT_TRUE(r.monotone);
    for (size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].energy, r.trace[k - 1].energy);
    EXPECT_TRUE(vorticity(r.state).vortexless());
    EXPECT_GE(min_abs_u(r.state), 0.9);
    EXPECT_LE(r.energy, 1.01 * hex * hex * md->J0);
  }
}

TEST_F(Minimize, LbfgsAgreesWithGradientDescent) {
  const GLState start = perturbed_state(meissner_state(mesh, md, 0.25, 3.0), 0.05, 9);
  MinimizeOptions o;
  o.max_iters = 1500;
  o.grad_tol = 1e-5;
  const MinimizeResult gd = minimize(start, o);
  o.method = Method::kLBFGS;
  o.max_iters = 3000;
  const MinimizeResult lb = minimize(start, o);
  EXPECT_TRUE(lb.converged);
  EXPECT_LE(lb.energy, gd.energy);
  EXPECT_NEAR(gd.energy, lb.energy, 1e-4 * lb.energy);
}

TEST_F(Minimize, FixedStepAndMomentum) {
  const GLState start = perturbed_state(meissner_state(mesh, md, 0.25, 2.0), 0.05, 4);
  MinimizeOptions o;
  o.step_rule = StepRule::kFixed;
  o.eta = 1e-3;
  o.max_iters = 50;
  const MinimizeResult r = minimize(start, o);
  EXPECT_LT(r.energy, gl_total_energy(start).total);
  o.step_rule = StepRule::kBacktracking;
  o.momentum = 0.5;
  const MinimizeResult m = minimize(start, o);
  EXPECT_LT(m.energy, gl_total_energy(start).total);
}

TEST_F(Minimize, OptionValidation) {
  MinimizeOptions o;
  o.max_iters = 0;
  EXPECT_THROW(o.validate(), Error);
  o = MinimizeOptions{};
  o.grad_tol = 0.0;
  EXPECT_THROW(o.validate(), Error);
  o = MinimizeOptions{};
  o.step_rule = StepRule::kFixed;
  o.eta = -1.0;
  EXPECT_THROW(o.validate(), Error);
}

TEST_F(Minimize, PerturbationIsReproducible) {
  const GLState s = meissner_state(mesh, md, 0.1, 1.0);
  const GLState a = perturbed_state(s, 0.1, 5), b = perturbed_state(s, 0.1, 5), c = perturbed_state(s, 0.1, 6);
  EXPECT_EQ(a.u.values, b.u.values);
  EXPECT_EQ(a.A.c[0], b.A.c[0]);
  EXPECT_NE(a.u.values, c.u.values);
}

TEST_F(Minimize, SeedVortexWinding) {
  const double h = mesh->spacing();
  const CurveCurrent up = z_diameter(*mesh);
  const ComplexField u = seed_vortex(mesh, up, 2 * h);
  const VorticityField v = vorticity(mesh, u, VectorField(mesh, Storage::kEdge));
  EXPECT_LT(v.closedness_defect(), 1e-11);
  const Grid& g = mesh->grid();
  int pierced = 0;
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i) {
      if (!v.valid[d][i]) continue;
      const Vec3 c = slot_position(g, Storage::kFace, d, i);
      const double dist = distance_to_curve(c, up);
      if (dist > 3 * h) EXPECT_NEAR(v.winding[d][i], 0.0, 1e-9);
      if (std::abs(v.winding[d][i]) > M_PI) {
        EXPECT_LE(dist, h);
        if (d == 2) {
          EXPECT_NEAR(v.winding[d][i], 2 * M_PI, 1e-9);
          ++pierced;
        }
      }
    }
  EXPECT_GE(pierced, int(1.6 / h));
  EXPECT_NEAR(vorticity_fraction_near(v, up, 3.0), 1.0, 1e-12);

  const VorticityField w = vorticity(mesh, seed_vortex(mesh, z_diameter(*mesh, false), 2 * h),
                                     VectorField(mesh, Storage::kEdge));
  for (const auto& [d, i] : w.vortex_faces())
    if (d == 2) EXPECT_NEAR(w.winding[d][i], -2 * M_PI, 1e-9);
}

TEST_F(Minimize, SeedVortexModulus) {
  const double h = mesh->spacing(), core = 3 * h;
  const CurveCurrent c = z_diameter(*mesh);
  const ComplexField u = seed_vortex(mesh, c, core);
  for (Index i : mesh->interior_nodes()) {
    const double dist = distance_to_curve(mesh->grid().position(i), c);
    EXPECT_NEAR(std::abs(u[i]), std::min(1.0, dist / core), 1e-12);
  }
}

TEST_F(Minimize, SeedVortexErrors) {
  const double h = mesh->spacing();
  try {
    seed_vortex(mesh, z_diameter(*mesh), 1.5 * h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoreTooSmall);
  }
  CurveCurrent out;
  out.vertices = {Vec3(0, 0, -2), Vec3(0, 0, 1)};
  out.endpoints_on_boundary = true;
  try {
    seed_vortex(mesh, out, 2 * h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCurveOutsideDomain);
  }
}

TEST_F(Minimize, SeededLoopWinding) {
  // A closed loop in Omega carries a vortex ring.
  const double h = mesh->spacing();
  CurveCurrent ring;
  ring.closed = true;
  for (int k = 0; k < 32; ++k) {
    const double t = 2 * M_PI * k / 32;
    ring.vertices.push_back(Vec3(0.5 * std::cos(t) + 0.03, 0.5 * std::sin(t) + 0.02, 0.07));
  }
  const VorticityField v = vorticity(mesh, seed_vortex(mesh, ring, 2 * h), VectorField(mesh, Storage::kEdge));
  EXPECT_LT(v.closedness_defect(), 1e-11);
  EXPECT_FALSE(v.vortexless());
  EXPECT_NEAR(vorticity_fraction_near(v, ring, 3.0), 1.0, 1e-12);
  // Pierced faces measure the lattice (L1) length of the ring, 8 r.
  EXPECT_NEAR(vortex_mass(v), 8 * 0.5, 0.3);
}

TEST_F(Minimize, ConvexityIdenticalStates) {
  const GLState s = meissner_state(mesh, md, 0.2, 2.0);
  EXPECT_EQ(convexity_diagnostic(s, s), 0.0);
}

TEST_F(Minimize, ConvexityModulusBound) {
  const double eps = 0.2;
  const GLState s1 = meissner_state(mesh, md, eps, 2.0);
  GLState s2 = s1;
  s2.u = sample_complex(mesh, [](const Vec3& p) { return Complex(1.0 - 0.05 * (1 + p[0] * p[1]), 0.0); });
  const double h3 = std::pow(mesh->spacing(), 3);
  double diff2 = 0.0;
  for (Index i = 0; i < mesh->grid().size(); ++i)
    diff2 += mesh->node_weight(i) * h3 * std::norm(s1.u[i] - s2.u[i]);
  EXPECT_GE(convexity_diagnostic(s1, s2), 3.0 / (64 * eps * eps) * diff2 - 1e-12);
}

TEST_F(Minimize, ConvexityRejectsVortices) {
  GLState s1 = meissner_state(mesh, md, 0.2, 2.0);
  GLState s2 = s1;
  s2.u = seed_vortex(mesh, z_diameter(*mesh), 2 * mesh->spacing());
  try {
    convexity_diagnostic(s1, s2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVortexPresent);
  }
}

TEST_F(Minimize, SweepValidation) {
  SweepOptions o;
  try {
    hc1_sweep(mesh, md, 0.05, {1.0, 2.0}, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMeshTooCoarse);
  }
  try {
    hc1_sweep(mesh, md, 0.25, {3.0, 2.0, 1.0}, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
  }
}

TEST_F(Minimize, SweepZeroFieldRow) {
  SweepOptions o;
  o.minimize.max_iters = 40;
  o.minimize.grad_tol = 1e-3;
  o.minimize.method = Method::kLBFGS;
  o.curve = z_diameter(*mesh);
  const SweepResult r = hc1_sweep(mesh, md, 0.25, {0.0}, o);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].vortexless);
  EXPECT_EQ(r.rows[0].vortex_mass, 0.0);
  EXPECT_FALSE(r.rows[0].seeded_wins);
  EXPECT_FALSE(r.crossed);
}
