#include "layer_potential.hpp"

#include <cmath>
#include <variant>

namespace glmeissner::detail {

namespace {

// Unit-cube face point for face f in [0,6): axis f/2, sign by parity.
Vec3 cube_point(int f, double s, double t) {
  const int axis = f / 2;
  const double sign = (f % 2 == 0) ? 1.0 : -1.0;
  Vec3 p;
  p[axis] = sign;
  p[(axis + 1) % 3] = s;
  p[(axis + 2) % 3] = t;
  return p;
}

Vec3 surface_map(const Shape& shape, int f, double s, double t) {
  const Vec3 c = cube_point(f, s, t);
  if (const auto* box = std::get_if<Box>(&shape)) return c.cwiseProduct(0.5 * Vec3(box->a, box->b, box->c));
  return c.normalized().cwiseProduct(half_extent(shape));
}

struct Patch {
  Vec3 x;
  double area;
};

Patch patch(const Shape& shape, int f, double s, double t, double ds) {
  const double d = 1e-6;
  const Vec3 xs = (surface_map(shape, f, s + d, t) - surface_map(shape, f, s - d, t)) / (2 * d);
  const Vec3 xt = (surface_map(shape, f, s, t + d) - surface_map(shape, f, s, t - d)) / (2 * d);
  return {surface_map(shape, f, s, t), xs.cross(xt).norm() * ds * ds};
}

double refine(const Shape& shape, int f, double s, double t, double ds, const Vec3& y, int depth) {
  const Patch p = patch(shape, f, s, t, ds);
  const double size = std::sqrt(p.area);
  const double dist = (p.x - y).norm();
  if (dist > 3.0 * size) return p.area / (4.0 * M_PI * dist);
  if (depth == 0) {
    // Flat disc of equal area centred on the target.
    if (dist < 0.6 * size) return std::sqrt(p.area / M_PI) / 2.0;
    return p.area / (4.0 * M_PI * dist);
  }
  const double q = 0.25 * ds;
  double acc = 0.0;
  for (int k = 0; k < 4; ++k)
    acc += refine(shape, f, s + ((k & 1) ? q : -q), t + ((k & 2) ? q : -q), 0.5 * ds, y, depth - 1);
  return acc;
}

}  // namespace

SurfaceQuadrature build_surface_quadrature(const Shape& shape, int n) {
  SurfaceQuadrature q;
  q.n = n;
  const double ds = 2.0 / n;
  for (int f = 0; f < 6; ++f)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Patch p = patch(shape, f, -1.0 + (i + 0.5) * ds, -1.0 + (j + 0.5) * ds, ds);
        q.x.push_back(p.x);
        q.area.push_back(p.area);
        q.nu.push_back(outward_normal(shape, p.x));
      }
  return q;
}

double single_layer_of_one(const Shape& shape, const SurfaceQuadrature& quad, const Vec3& target) {
  const int n = quad.n;
  const double ds = 2.0 / n;
  double acc = 0.0;
  for (size_t k = 0; k < quad.x.size(); ++k) {
    const double dist = (quad.x[k] - target).norm();
    if (dist > 3.0 * std::sqrt(quad.area[k])) {
      acc += quad.area[k] / (4.0 * M_PI * dist);
      continue;
    }
    const int i = int(k % n), j = int((k / n) % n), f = int(k / (size_t(n) * n));
    acc += refine(shape, f, -1.0 + (i + 0.5) * ds, -1.0 + (j + 0.5) * ds, ds, target, 7);
  }
  return acc;
}

}  // namespace glmeissner::detail
