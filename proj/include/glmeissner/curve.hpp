#pragma once

#include <functional>
#include <vector>

#include "glmeissner/fields.hpp"

namespace glmeissner {

// Oriented polyline 1-current: a simple loop in Omega or an arc with two
// distinct endpoints on the boundary.
struct CurveCurrent {
  std::vector<Vec3> vertices;
  bool closed = false;
  bool endpoints_on_boundary = false;
  int multiplicity = 1;

  double length() const;
  size_t segment_count() const;
  std::pair<Vec3, Vec3> segment(size_t k) const;
  CurveCurrent reversed() const;
  // Class-X checks against the mesh; throws ValidationError / CurveOutsideDomain.
  void validate(const DomainMesh& mesh) const;
};

using VectorFunction = std::function<Vec3(const Vec3&)>;

// Sum over segments of v(midpoint) . (b - a), times multiplicity.
double line_integral(const VectorFunction& v, const CurveCurrent& curve);
double line_integral(const VectorField& v, const CurveCurrent& curve);

// Vertices must lie in the closure of Omega.
void require_curve_in_domain(const DomainMesh& mesh, const CurveCurrent& curve);

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);
double distance_to_curve(const Vec3& p, const CurveCurrent& curve);
// Symmetric Hausdorff distance between two polylines, with both sampled at
// spacing <= step.
double hausdorff_distance(const CurveCurrent& a, const CurveCurrent& b, double step);

}  // namespace glmeissner
