#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace glmeissner {

using Vec3 = Eigen::Vector3d;
using Index = std::int64_t;

// Analytic shapes, always centered at the origin.
struct Ball {
  double radius = 1.0;
};
// Full side lengths along x, y, z.
struct Box {
  double a = 1.0, b = 1.0, c = 1.0;
};
// Semi-axes along x, y, z.
struct Ellipsoid {
  double a = 1.0, b = 1.0, c = 1.0;
};
using Shape = std::variant<Ball, Box, Ellipsoid>;

void validate_shape(const Shape& shape);
std::string shape_name(const Shape& shape);
Vec3 half_extent(const Shape& shape);
double shape_volume(const Shape& shape);

// Exact Euclidean signed distance (negative inside).
double signed_distance(const Shape& shape, const Vec3& p);
Vec3 closest_point(const Shape& shape, const Vec3& p);
// Outward unit normal at closest_point(shape, p).
Vec3 outward_normal(const Shape& shape, const Vec3& p);

// Smooth defining function: negative inside, zero on the surface. Used to
// build fields that vanish on the boundary.
double defining_function(const Shape& shape, const Vec3& p);
Vec3 defining_gradient(const Shape& shape, const Vec3& p);

// Uniform node lattice. Node (i,j,k) sits at origin + h*(i,j,k) and has flat
// index i + n0*(j + n1*k).
struct Grid {
  std::array<int, 3> n{0, 0, 0};
  Vec3 origin = Vec3::Zero();
  double h = 1.0;

  Index size() const { return Index(n[0]) * n[1] * n[2]; }
  Index stride(int d) const { return d == 0 ? 1 : d == 1 ? Index(n[0]) : Index(n[0]) * n[1]; }
  Index index(int i, int j, int k) const { return i + Index(n[0]) * (j + Index(n[1]) * k); }
  std::array<int, 3> ijk(Index idx) const {
    const int i = int(idx % n[0]);
    const Index r = idx / n[0];
    return {i, int(r % n[1]), int(r / n[1])};
  }
  Vec3 position(int i, int j, int k) const { return origin + h * Vec3(i, j, k); }
  Vec3 position(Index idx) const {
    const auto c = ijk(idx);
    return position(c[0], c[1], c[2]);
  }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < n[0] && j < n[1] && k < n[2];
  }
  // Edge in direction d starting at node idx exists when its far end does.
  bool has_edge(int d, Index idx) const { return ijk(idx)[d] + 1 < n[d]; }
  // Face normal to d with lowest corner idx.
  bool has_face(int d, Index idx) const {
    const auto c = ijk(idx);
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    return c[d1] + 1 < n[d1] && c[d2] + 1 < n[d2];
  }
  bool has_cell(Index idx) const {
    const auto c = ijk(idx);
    return c[0] + 1 < n[0] && c[1] + 1 < n[1] && c[2] + 1 < n[2];
  }
  Vec3 lower() const { return origin; }
  Vec3 upper() const { return origin + h * Vec3(n[0] - 1, n[1] - 1, n[2] - 1); }
};

enum class NodeClass : std::uint8_t { kOutside = 0, kInterior = 1, kBoundary = 2 };

// Voxelized domain: grid over the shape's bounding box plus `pad` cells.
// Interior nodes lie strictly inside the shape; boundary nodes are outside
// (or on the surface) with an interior 26-neighbor. Also carries the analytic
// volume fractions used by every Omega-quadrature.
class DomainMesh {
 public:
  DomainMesh(const Shape& shape, double h, int pad);

  const Shape& shape() const { return shape_; }
  double spacing() const { return grid_.h; }
  int pad() const { return pad_; }
  const Grid& grid() const { return grid_; }
  Vec3 origin() const { return grid_.origin; }

  NodeClass node_class(Index idx) const { return NodeClass(node_class_[idx]); }
  bool is_interior(Index idx) const { return node_class_[idx] == std::uint8_t(NodeClass::kInterior); }
  const std::vector<Index>& interior_nodes() const { return interior_; }
  const std::vector<Index>& boundary_nodes() const { return boundary_; }
  // Outward normal at a boundary node (asserts the node is a boundary node).
  const Vec3& boundary_normal(Index idx) const;

  double signed_distance(const Vec3& p) const;  // throws OutOfBoundingBox
  double node_sd(Index idx) const { return node_sd_[idx]; }

  // Fraction of the h-cube centered at the node / edge midpoint / face center
  // that lies in Omega.
  double node_weight(Index idx) const { return node_weight_[idx]; }
  double edge_weight(int d, Index idx) const { return edge_weight_[d][idx]; }
  double face_weight(int d, Index idx) const { return face_weight_[d][idx]; }
  const std::vector<double>& node_weights() const { return node_weight_; }
  const std::vector<double>& edge_weights(int d) const { return edge_weight_[d]; }
  const std::vector<double>& face_weights(int d) const { return face_weight_[d]; }

  // Quadrature volume of Omega: sum of node weights times h^3.
  double volume() const;

 private:
  Shape shape_;
  int pad_;
  Grid grid_;
  std::vector<std::uint8_t> node_class_;
  std::vector<double> node_sd_;
  std::vector<Index> interior_;
  std::vector<Index> boundary_;
  std::vector<std::int32_t> boundary_slot_;
  std::vector<Vec3> normals_;
  std::vector<double> node_weight_;
  std::array<std::vector<double>, 3> edge_weight_;
  std::array<std::vector<double>, 3> face_weight_;
};

using MeshPtr = std::shared_ptr<const DomainMesh>;

MeshPtr build_mesh(const Shape& shape, double spacing, int pad);

// Fraction of the axis-aligned cube (center, side) inside the shape.
double cube_volume_fraction(const Shape& shape, const Vec3& center, double side, int depth = 3);

}  // namespace glmeissner
