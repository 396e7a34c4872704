#include "glmeissner/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "glmeissner/error.hpp"

namespace glmeissner {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec3 box_half(const Box& b) { return 0.5 * Vec3(b.a, b.b, b.c); }

// Closest point on an ellipse / ellipsoid for a query in the first octant with
// semi-axes sorted in decreasing order. Bisection on the Lagrange parameter,
// after D. Eberly, "Distance from a Point to an Ellipse, an Ellipsoid, or a
// Hyperellipsoid". Works for points inside and outside.
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int it = 0; it < 1100; ++it) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0), b = z1 / (s + 1.0);
    g = a * a + b * b - 1.0;
    if (g > 0) s0 = s;
    else if (g < 0) s1 = s;
    else break;
  }
  return s;
}

std::array<double, 2> ellipse_closest(double e0, double e1, double y0, double y1) {
  if (y1 > 0) {
    if (y0 > 0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g != 0) {
        const double r0 = (e0 / e1) * (e0 / e1);
        const double s = ellipse_root(r0, z0, z1, g);
        return {r0 * y0 / (s + r0), y1 / (s + 1.0)};
      }
      return {y0, y1};
    }
    return {0.0, e1};
  }
  const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
  }
  return {e0, 0.0};
}

double ellipsoid_root(double r0, double r1, double z0, double z1, double z2, double g) {
  const double n0 = r0 * z0, n1 = r1 * z1;
  double s0 = z2 - 1.0;
  double s1 = g < 0 ? 0.0 : std::sqrt(n0 * n0 + n1 * n1 + z2 * z2) - 1.0;
  double s = 0.0;
  for (int it = 0; it < 1100; ++it) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0), b = n1 / (s + r1), c = z2 / (s + 1.0);
    g = a * a + b * b + c * c - 1.0;
    if (g > 0) s0 = s;
    else if (g < 0) s1 = s;
    else break;
  }
  return s;
}

Vec3 ellipsoid_closest_sorted(const Vec3& e, const Vec3& y) {
  Vec3 x;
  if (y[2] > 0) {
    if (y[1] > 0) {
      if (y[0] > 0) {
        const Vec3 z = y.cwiseQuotient(e);
        const double g = z.squaredNorm() - 1.0;
        if (g != 0) {
          const double r0 = (e[0] / e[2]) * (e[0] / e[2]);
          const double r1 = (e[1] / e[2]) * (e[1] / e[2]);
          const double s = ellipsoid_root(r0, r1, z[0], z[1], z[2], g);
          x = Vec3(r0 * y[0] / (s + r0), r1 * y[1] / (s + r1), y[2] / (s + 1.0));
        } else {
          x = y;
        }
      } else {
        const auto p = ellipse_closest(e[1], e[2], y[1], y[2]);
        x = Vec3(0.0, p[0], p[1]);
      }
    } else if (y[0] > 0) {
      const auto p = ellipse_closest(e[0], e[2], y[0], y[2]);
      x = Vec3(p[0], 0.0, p[1]);
    } else {
      x = Vec3(0.0, 0.0, e[2]);
    }
    return x;
  }
  const double denom0 = e[0] * e[0] - e[2] * e[2], denom1 = e[1] * e[1] - e[2] * e[2];
  const double numer0 = e[0] * y[0], numer1 = e[1] * y[1];
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0, xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0) return Vec3(e[0] * xde0, e[1] * xde1, e[2] * std::sqrt(discr));
  }
  const auto p = ellipse_closest(e[0], e[1], y[0], y[1]);
  return Vec3(p[0], p[1], 0.0);
}

Vec3 ellipsoid_closest(const Ellipsoid& el, const Vec3& p) {
  const Vec3 axes(el.a, el.b, el.c);
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return axes[i] > axes[j]; });
  Vec3 e, y;
  for (int k = 0; k < 3; ++k) {
    e[k] = axes[order[k]];
    y[k] = std::abs(p[order[k]]);
  }
  const Vec3 xs = ellipsoid_closest_sorted(e, y);
  Vec3 x;
  for (int k = 0; k < 3; ++k) x[order[k]] = std::copysign(xs[k], p[order[k]]);
  return x;
}

bool ellipsoid_inside(const Ellipsoid& el, const Vec3& p) {
  const double q = (p[0] / el.a) * (p[0] / el.a) + (p[1] / el.b) * (p[1] / el.b) +
                   (p[2] / el.c) * (p[2] / el.c);
  return q < 1.0;
}

double cube_fraction_rec(const Shape& shape, const Vec3& c, double side, int depth) {
  const double sd = signed_distance(shape, c);
  const double reach = 0.5 * std::sqrt(3.0) * side;
  if (sd <= -reach) return 1.0;
  if (sd >= reach) return 0.0;
  if (depth == 0) return std::clamp(0.5 - sd / side, 0.0, 1.0);
  const double q = 0.25 * side;
  double acc = 0.0;
  for (int k = 0; k < 8; ++k) {
    const Vec3 off((k & 1) ? q : -q, (k & 2) ? q : -q, (k & 4) ? q : -q);
    acc += cube_fraction_rec(shape, c + off, 0.5 * side, depth - 1);
  }
  return acc / 8.0;
}

}  // namespace

void validate_shape(const Shape& shape) {
  const bool ok = std::visit(
      Overloaded{[](const Ball& b) { return b.radius > 0; },
                 [](const Box& b) { return b.a > 0 && b.b > 0 && b.c > 0; },
                 [](const Ellipsoid& e) { return e.a > 0 && e.b > 0 && e.c > 0; }},
      shape);
  if (!ok) throw Error(ErrorCode::kDegenerateShape, "every shape dimension must be positive");
}

std::string shape_name(const Shape& shape) {
  return std::visit(Overloaded{[](const Ball&) { return std::string("ball"); },
                               [](const Box&) { return std::string("box"); },
                               [](const Ellipsoid&) { return std::string("ellipsoid"); }},
                    shape);
}

Vec3 half_extent(const Shape& shape) {
  return std::visit(Overloaded{[](const Ball& b) { return Vec3(b.radius, b.radius, b.radius); },
                               [](const Box& b) { return box_half(b); },
                               [](const Ellipsoid& e) { return Vec3(e.a, e.b, e.c); }},
                    shape);
}

double shape_volume(const Shape& shape) {
  return std::visit(
      Overloaded{[](const Ball& b) { return 4.0 * M_PI / 3.0 * std::pow(b.radius, 3); },
                 [](const Box& b) { return b.a * b.b * b.c; },
                 [](const Ellipsoid& e) { return 4.0 * M_PI / 3.0 * e.a * e.b * e.c; }},
      shape);
}

double signed_distance(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{[&](const Ball& b) { return p.norm() - b.radius; },
                 [&](const Box& b) {
                   const Vec3 q = p.cwiseAbs() - box_half(b);
                   const double outside = q.cwiseMax(0.0).norm();
                   const double inside = std::min(q.maxCoeff(), 0.0);
                   return outside + inside;
                 },
                 [&](const Ellipsoid& e) {
                   const double d = (ellipsoid_closest(e, p) - p).norm();
                   return ellipsoid_inside(e, p) ? -d : d;
                 }},
      shape);
}

Vec3 closest_point(const Shape& shape, const Vec3& p) {
  return std::visit(Overloaded{[&](const Ball& b) -> Vec3 {
                                 const double r = p.norm();
                                 if (r == 0.0) return Vec3(0, 0, b.radius);
                                 return p * (b.radius / r);
                               },
                               [&](const Box& b) -> Vec3 {
                                 const Vec3 half = box_half(b);
                                 const Vec3 q = p.cwiseAbs() - half;
                                 if (q.maxCoeff() > 0) return p.cwiseMax(-half).cwiseMin(half);
                                 int d = 0;
                                 q.maxCoeff(&d);
                                 Vec3 x = p;
                                 x[d] = std::copysign(half[d], p[d]);
                                 return x;
                               },
                               [&](const Ellipsoid& e) -> Vec3 { return ellipsoid_closest(e, p); }},
                    shape);
}

Vec3 outward_normal(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{[&](const Ball&) -> Vec3 {
                   const double r = p.norm();
                   if (r == 0.0) return Vec3(0, 0, 1);
                   return p / r;
                 },
                 [&](const Box& b) -> Vec3 {
                   const Vec3 half = box_half(b);
                   const Vec3 q = p.cwiseAbs() - half;
                   const Vec3 x = p.cwiseMax(-half).cwiseMin(half);
                   const Vec3 diff = p - x;
                   if (q.maxCoeff() > 0 && diff.norm() > 0) return diff.normalized();
                   int d = 0;
                   q.maxCoeff(&d);
                   Vec3 n = Vec3::Zero();
                   n[d] = p[d] >= 0 ? 1.0 : -1.0;
                   return n;
                 },
                 [&](const Ellipsoid& e) -> Vec3 {
                   const Vec3 x = ellipsoid_closest(e, p);
                   const Vec3 g(x[0] / (e.a * e.a), x[1] / (e.b * e.b), x[2] / (e.c * e.c));
                   return g.normalized();
                 }},
      shape);
}

double defining_function(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{[&](const Ball& b) { return p.squaredNorm() - b.radius * b.radius; },
                 [&](const Box& b) {
                   const Vec3 h = box_half(b);
                   double prod = 1.0;
                   for (int d = 0; d < 3; ++d) prod *= (h[d] * h[d] - p[d] * p[d]);
                   return -prod;
                 },
                 [&](const Ellipsoid& e) {
                   return (p[0] / e.a) * (p[0] / e.a) + (p[1] / e.b) * (p[1] / e.b) +
                          (p[2] / e.c) * (p[2] / e.c) - 1.0;
                 }},
      shape);
}

Vec3 defining_gradient(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{[&](const Ball&) -> Vec3 { return 2.0 * p; },
                 [&](const Box& b) -> Vec3 {
                   const Vec3 h = box_half(b);
                   Vec3 f;
                   for (int d = 0; d < 3; ++d) f[d] = h[d] * h[d] - p[d] * p[d];
                   return Vec3(2 * p[0] * f[1] * f[2], 2 * p[1] * f[0] * f[2], 2 * p[2] * f[0] * f[1]);
                 },
                 [&](const Ellipsoid& e) -> Vec3 {
                   return Vec3(2 * p[0] / (e.a * e.a), 2 * p[1] / (e.b * e.b), 2 * p[2] / (e.c * e.c));
                 }},
      shape);
}

double cube_volume_fraction(const Shape& shape, const Vec3& center, double side, int depth) {
  return cube_fraction_rec(shape, center, side, depth);
}

DomainMesh::DomainMesh(const Shape& shape, double h, int pad) : shape_(shape), pad_(pad) {
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorCode::kNonPositiveSpacing, "spacing must be > 0");
  validate_shape(shape);
  if (pad < 0) throw Error(ErrorCode::kValidationError, "pad must be >= 0");

  const Vec3 ext = half_extent(shape);
  grid_.h = h;
  std::array<int, 3> half{};
  for (int d = 0; d < 3; ++d) {
    const double cells = std::ceil(ext[d] / h - 1e-12);
    if (cells > 4000) throw Error(ErrorCode::kValidationError, "spacing too small for the domain");
    half[d] = int(cells) + 1 + pad;
    grid_.n[d] = 2 * half[d] + 1;
    grid_.origin[d] = -half[d] * h;
  }

  const Index n = grid_.size();
  node_class_.assign(n, std::uint8_t(NodeClass::kOutside));
  node_sd_.resize(n);
  for (Index idx = 0; idx < n; ++idx) {
    node_sd_[idx] = glmeissner::signed_distance(shape_, grid_.position(idx));
    if (node_sd_[idx] < 0) {
      node_class_[idx] = std::uint8_t(NodeClass::kInterior);
      interior_.push_back(idx);
    }
  }
  if (interior_.empty()) throw Error(ErrorCode::kEmptyDomain, "no grid node lies inside the shape");

  boundary_slot_.assign(n, -1);
  for (int k = 0; k < grid_.n[2]; ++k)
    for (int j = 0; j < grid_.n[1]; ++j)
      for (int i = 0; i < grid_.n[0]; ++i) {
        const Index idx = grid_.index(i, j, k);
        if (node_class_[idx] == std::uint8_t(NodeClass::kInterior)) continue;
        bool touches = false;
        for (int dk = -1; dk <= 1 && !touches; ++dk)
          for (int dj = -1; dj <= 1 && !touches; ++dj)
            for (int di = -1; di <= 1 && !touches; ++di) {
              if (!grid_.contains(i + di, j + dj, k + dk)) continue;
              touches = node_class_[grid_.index(i + di, j + dj, k + dk)] ==
                        std::uint8_t(NodeClass::kInterior);
            }
        if (touches) {
          boundary_slot_[idx] = std::int32_t(boundary_.size());
          boundary_.push_back(idx);
        }
      }
  for (Index idx : boundary_) node_class_[idx] = std::uint8_t(NodeClass::kBoundary);
  normals_.reserve(boundary_.size());
  for (Index idx : boundary_) normals_.push_back(outward_normal(shape_, grid_.position(idx)));

  // 6-connectivity of the interior set.
  {
    std::vector<char> seen(n, 0);
    std::deque<Index> queue{interior_.front()};
    seen[interior_.front()] = 1;
    Index reached = 0;
    while (!queue.empty()) {
      const Index idx = queue.front();
      queue.pop_front();
      ++reached;
      const auto c = grid_.ijk(idx);
      for (int d = 0; d < 3; ++d)
        for (int s : {-1, 1}) {
          auto q = c;
          q[d] += s;
          if (!grid_.contains(q[0], q[1], q[2])) continue;
          const Index nb = grid_.index(q[0], q[1], q[2]);
          if (!seen[nb] && is_interior(nb)) {
            seen[nb] = 1;
            queue.push_back(nb);
          }
        }
    }
    if (reached != Index(interior_.size()))
      throw Error(ErrorCode::kDegenerateShape, "interior nodes are disconnected at this spacing");
  }

  // Volume fractions. Cells are h-cubes centered at nodes, edge midpoints and
  // face centers; only cells within reach of the surface are subdivided.
  const double reach = 0.5 * std::sqrt(3.0) * h;
  auto fraction = [&](const Vec3& c) {
    const double sd = glmeissner::signed_distance(shape_, c);
    if (sd <= -reach) return 1.0;
    if (sd >= reach) return 0.0;
    return cube_fraction_rec(shape_, c, h, 3);
  };
  node_weight_.resize(n);
  for (Index idx = 0; idx < n; ++idx) {
    const double sd = node_sd_[idx];
    node_weight_[idx] = sd <= -reach ? 1.0 : sd >= reach ? 0.0 : cube_fraction_rec(shape_, grid_.position(idx), h, 3);
  }
  for (int d = 0; d < 3; ++d) {
    edge_weight_[d].assign(n, 0.0);
    face_weight_[d].assign(n, 0.0);
    Vec3 e_off = Vec3::Zero();
    e_off[d] = 0.5 * h;
    Vec3 f_off = Vec3::Constant(0.5 * h);
    f_off[d] = 0.0;
    for (Index idx = 0; idx < n; ++idx) {
      // Nodes far from the surface have all incident cells fully in or out.
      const double sd = node_sd_[idx];
      if (sd <= -2 * h) {
        if (grid_.has_edge(d, idx)) edge_weight_[d][idx] = 1.0;
        if (grid_.has_face(d, idx)) face_weight_[d][idx] = 1.0;
        continue;
      }
      if (sd >= 2 * h) continue;
      const Vec3 p = grid_.position(idx);
      if (grid_.has_edge(d, idx)) edge_weight_[d][idx] = fraction(p + e_off);
      if (grid_.has_face(d, idx)) face_weight_[d][idx] = fraction(p + f_off);
    }
  }
}

const Vec3& DomainMesh::boundary_normal(Index idx) const {
  const std::int32_t slot = boundary_slot_.at(idx);
  if (slot < 0) throw Error(ErrorCode::kValidationError, "node is not a boundary node");
  return normals_[slot];
}

double DomainMesh::signed_distance(const Vec3& p) const {
  const double tol = 1e-9 * grid_.h;
  const Vec3 lo = grid_.lower(), hi = grid_.upper();
  for (int d = 0; d < 3; ++d)
    if (p[d] < lo[d] - tol || p[d] > hi[d] + tol)
      throw Error(ErrorCode::kOutOfBoundingBox, "point lies outside the mesh bounding box");
  return glmeissner::signed_distance(shape_, p);
}

double DomainMesh::volume() const {
  double acc = 0.0;
  for (double w : node_weight_) acc += w;
  return acc * std::pow(grid_.h, 3);
}

MeshPtr build_mesh(const Shape& shape, double spacing, int pad) {
  return std::make_shared<const DomainMesh>(shape, spacing, pad);
}

}  // namespace glmeissner
