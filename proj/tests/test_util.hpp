#pragma once

#include <random>

#include "glmeissner/fields.hpp"

namespace glmeissner::testing {

inline VectorField random_field(const MeshPtr& mesh, Storage s, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  VectorField v(mesh, s);
  const Grid& g = mesh->grid();
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i)
      if (slot_exists(g, s, d, i)) v.c[d][i] = n(rng);
  return v;
}

inline ScalarField random_scalar(const MeshPtr& mesh, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  ScalarField s(mesh, Storage::kNode);
  for (double& v : s.values) v = n(rng);
  return s;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace glmeissner::testing
