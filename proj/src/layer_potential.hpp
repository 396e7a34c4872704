#pragma once

#include <vector>

#include "glmeissner/mesh.hpp"

namespace glmeissner::detail {

// Midpoint quadrature of the boundary surface over a cube-sphere style
// parametrization: six faces, n x n patches each.
struct SurfaceQuadrature {
  int n = 0;
  std::vector<Vec3> x;
  std::vector<Vec3> nu;
  std::vector<double> area;
};

SurfaceQuadrature build_surface_quadrature(const Shape& shape, int n);

// S[1](y) = int_{boundary} dS(x) / (4 pi |x - y|) for a target on (or near)
// the surface, by adaptive patch refinement around the target.
double single_layer_of_one(const Shape& shape, const SurfaceQuadrature& quad, const Vec3& target);

}  // namespace glmeissner::detail
