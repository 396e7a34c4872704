#pragma once

#include "glmeissner/glcore.hpp"

namespace glmeissner::detail {

struct TermSums {
  double kinetic = 0.0, potential = 0.0, field_inside = 0.0, field_outside = 0.0;
  double vorticity = 0.0, r0 = 0.0;
};

// Per-edge scratch reused across evaluations.
struct GLWorkspace {
  std::array<std::vector<Complex>, 3> cp, cq;  // gradient parts for edge tails / heads
  std::array<std::vector<double>, 3> face;     // h^3 curl A' per face
};

// All energy terms of the splitting in one pass. When du / dA are given
// they receive the gradient of the total with respect to (Re u, Im u)
// packed as du = dE/dRe + i dE/dIm, and A'. Inactive nodes get zero.
TermSums gl_terms(const GLState& s, ComplexField* du, VectorField* dA, GLWorkspace& ws);

}  // namespace glmeissner::detail
