#include <gtest/gtest.h>

#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/mesh.hpp"

using namespace glmeissner;

TEST(Shape, SignedDistanceBall) {
  const Shape b = Ball{2.0};
  EXPECT_NEAR(signed_distance(b, Vec3(0, 0, 0)), -2.0, 1e-15);
  EXPECT_NEAR(signed_distance(b, Vec3(3, 0, 0)), 1.0, 1e-15);
  EXPECT_TRUE(closest_point(b, Vec3(1, 1, 1)).isApprox(2.0 / std::sqrt(3.0) * Vec3(1, 1, 1)));
}

TEST(Shape, SignedDistanceBoxAndEllipsoid) {
  const Shape box = Box{2.0, 4.0, 6.0};
  EXPECT_NEAR(signed_distance(box, Vec3(0, 0, 0)), -1.0, 1e-15);
  EXPECT_NEAR(signed_distance(box, Vec3(2, 0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(signed_distance(box, Vec3(2, 3, 0)), std::sqrt(2.0), 1e-14);
  const Shape el = Ellipsoid{1.0, 2.0, 3.0};
  EXPECT_NEAR(signed_distance(el, Vec3(0, 0, 4)), 1.0, 1e-12);
  EXPECT_NEAR(signed_distance(el, Vec3(0, 1, 0)), -std::sqrt(2.0 / 3.0), 1e-10);
  // Closest points lie on the surface and the offset is along the normal.
  for (const Vec3& p : {Vec3(0.3, 2.5, -1.0), Vec3(-0.1, 0.2, 0.4), Vec3(2, 2, 2)}) {
    const Vec3 c = closest_point(el, p);
    EXPECT_NEAR(signed_distance(el, c), 0.0, 1e-10);
    const Vec3 nu = outward_normal(el, p);
    EXPECT_NEAR(nu.norm(), 1.0, 1e-12);
    EXPECT_NEAR((p - c).cross(nu).norm(), 0.0, 1e-8);
  }
}

TEST(Shape, Validation) {
  EXPECT_THROW(validate_shape(Ball{0.0}), Error);
  EXPECT_THROW(validate_shape(Box{1.0, -1.0, 1.0}), Error);
  try {
    build_mesh(Ball{1.0}, -0.1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveSpacing);
  }
  try {
    build_mesh(Ellipsoid{1.0, 0.0, 1.0}, 0.1, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateShape);
  }
}

TEST(Mesh, NodeClassesAndVolume) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 1.0 / 16, 3);
  const Grid& g = mesh->grid();
  for (Index i : mesh->interior_nodes()) EXPECT_LT(signed_distance(mesh->shape(), g.position(i)), 0.0);
  for (Index i : mesh->boundary_nodes()) {
    EXPECT_GE(signed_distance(mesh->shape(), g.position(i)), 0.0);
    EXPECT_LT(signed_distance(mesh->shape(), g.position(i)), std::sqrt(3.0) * g.h + 1e-12);
  }
  EXPECT_NEAR(mesh->volume(), 4.0 * M_PI / 3.0, 1e-3 * 4.0 * M_PI / 3.0);
  // Weights are fractions.
  for (Index i = 0; i < g.size(); ++i) {
    EXPECT_GE(mesh->node_weight(i), 0.0);
    EXPECT_LE(mesh->node_weight(i), 1.0);
  }
}

TEST(Mesh, CubeFraction) {
  const Shape b = Ball{1.0};
  EXPECT_DOUBLE_EQ(cube_volume_fraction(b, Vec3(0, 0, 0), 0.1), 1.0);
  EXPECT_DOUBLE_EQ(cube_volume_fraction(b, Vec3(2, 0, 0), 0.1), 0.0);
  const Shape box = Box{2.0, 2.0, 2.0};
  EXPECT_NEAR(cube_volume_fraction(box, Vec3(1, 0, 0), 0.2), 0.5, 1e-12);
}

TEST(Mesh, OutOfBoundingBox) {
  const MeshPtr mesh = build_mesh(Ball{1.0}, 0.25, 2);
  try {
    mesh->signed_distance(Vec3(10, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfBoundingBox);
  }
}

TEST(Mesh, BallInteriorIsAnalyticSet) {
  for (double R : {0.7, 1.0, 1.3})
    for (double h : {0.5, 0.25, 0.1}) {
      const MeshPtr mesh = build_mesh(Ball{R}, h, 2);
      const Grid& g = mesh->grid();
      size_t count = 0;
      for (Index i = 0; i < g.size(); ++i) {
        const bool inside = g.position(i).norm() < R;
        EXPECT_EQ(mesh->is_interior(i), inside);
        count += inside;
      }
      EXPECT_EQ(mesh->interior_nodes().size(), count);
    }
}

TEST(Mesh, BoxCentreNode) {
  const MeshPtr mesh = build_mesh(Box{2, 2, 2}, 1.0, 0);
  ASSERT_EQ(mesh->interior_nodes().size(), 1u);
  EXPECT_LT(mesh->grid().position(mesh->interior_nodes()[0]).norm(), 1e-15);
}

TEST(Mesh, RefinementScaling) {
  size_t prev = build_mesh(Ball{1.0}, 1.0 / 8, 1)->interior_nodes().size();
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const size_t n = build_mesh(Ball{1.0}, h, 1)->interior_nodes().size();
    const double ratio = double(n) / double(prev);
    EXPECT_GE(ratio, 7.2);
    EXPECT_LE(ratio, 8.8);
    prev = n;
  }
}

TEST(Mesh, BoundaryInvariants) {
  for (const Shape& shape : {Shape(Ball{1.0}), Shape(Ellipsoid{1.0, 0.7, 1.2}), Shape(Box{1.5, 1.0, 2.0})}) {
    const MeshPtr mesh = build_mesh(shape, 0.1, 2);
    const Grid& g = mesh->grid();
    for (Index i : mesh->boundary_nodes()) {
      EXPECT_NEAR(mesh->boundary_normal(i).norm(), 1.0, 1e-12);
      if (const Ball* b = std::get_if<Ball>(&shape)) {
        (void)b;
        const Vec3 p = g.position(i);
        EXPECT_LT((mesh->boundary_normal(i) - p / p.norm()).norm(), 1e-12);
      }
      const auto c = g.ijk(i);
      bool in = false, out = false;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (!g.contains(c[0] + dx, c[1] + dy, c[2] + dz)) {
              out = true;
              continue;
            }
            const Index j = g.index(c[0] + dx, c[1] + dy, c[2] + dz);
            if (mesh->is_interior(j)) in = true;
            if (mesh->node_class(j) == NodeClass::kOutside) out = true;
          }
      EXPECT_TRUE(in);
      EXPECT_TRUE(out);
    }
    // Interior 6-connectivity: one component.
    std::vector<char> seen(g.size(), 0);
    std::vector<Index> stack = {mesh->interior_nodes()[0]};
    seen[stack[0]] = 1;
    size_t reached = 0;
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      ++reached;
      const auto c = g.ijk(i);
      for (int d = 0; d < 3; ++d)
        for (int s : {-1, 1}) {
          auto q = c;
          q[d] += s;
          if (!g.contains(q[0], q[1], q[2])) continue;
          const Index j = g.index(q[0], q[1], q[2]);
          if (mesh->is_interior(j) && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
    }
    EXPECT_EQ(reached, mesh->interior_nodes().size()) << shape_name(shape);
  }
}
