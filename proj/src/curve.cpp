#include "glmeissner/curve.hpp"

#include <algorithm>
#include <cmath>

#include "glmeissner/error.hpp"

namespace glmeissner {

size_t CurveCurrent::segment_count() const {
  if (vertices.size() < 2) return 0;
  return closed ? vertices.size() : vertices.size() - 1;
}

std::pair<Vec3, Vec3> CurveCurrent::segment(size_t k) const {
  return {vertices[k], vertices[(k + 1) % vertices.size()]};
}

double CurveCurrent::length() const {
  double acc = 0.0;
  for (size_t k = 0; k < segment_count(); ++k) {
    const auto [a, b] = segment(k);
    acc += (b - a).norm();
  }
  return acc * multiplicity;
}

CurveCurrent CurveCurrent::reversed() const {
  CurveCurrent out = *this;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

void require_curve_in_domain(const DomainMesh& mesh, const CurveCurrent& curve) {
  const double tol = 1e-8 * mesh.spacing();
  for (const Vec3& p : curve.vertices)
    if (signed_distance(mesh.shape(), p) > tol)
      throw Error(ErrorCode::kCurveOutsideDomain, "curve vertex outside the closure of the domain");
}

void CurveCurrent::validate(const DomainMesh& mesh) const {
  if (multiplicity < 1) throw Error(ErrorCode::kValidationError, "multiplicity must be positive");
  if (vertices.size() < 2 || (closed && vertices.size() < 3))
    throw Error(ErrorCode::kValidationError, "curve has too few vertices");
  for (size_t k = 0; k < segment_count(); ++k) {
    const auto [a, b] = segment(k);
    if ((b - a).norm() == 0.0) throw Error(ErrorCode::kValidationError, "repeated consecutive vertex");
  }
  require_curve_in_domain(mesh, *this);
  const double h = mesh.spacing();
  if (!closed) {
    if (!endpoints_on_boundary) throw Error(ErrorCode::kValidationError, "open curve must end on the boundary");
    const Vec3& a = vertices.front();
    const Vec3& b = vertices.back();
    if (std::abs(signed_distance(mesh.shape(), a)) > h || std::abs(signed_distance(mesh.shape(), b)) > h)
      throw Error(ErrorCode::kValidationError, "arc endpoint farther than h from the boundary");
    if ((a - b).norm() == 0.0) throw Error(ErrorCode::kValidationError, "arc endpoints coincide");
  }
  std::vector<Vec3> sorted = vertices;
  std::sort(sorted.begin(), sorted.end(), [](const Vec3& p, const Vec3& q) {
    return std::lexicographical_compare(p.data(), p.data() + 3, q.data(), q.data() + 3);
  });
  for (size_t k = 1; k < sorted.size(); ++k)
    if ((sorted[k] - sorted[k - 1]).norm() < 1e-12 * h)
      throw Error(ErrorCode::kValidationError, "curve revisits a vertex");
}

double line_integral(const VectorFunction& v, const CurveCurrent& curve) {
  double acc = 0.0;
  for (size_t k = 0; k < curve.segment_count(); ++k) {
    const auto [a, b] = curve.segment(k);
    acc += v(0.5 * (a + b)).dot(b - a);
  }
  return acc * curve.multiplicity;
}

double line_integral(const VectorField& v, const CurveCurrent& curve) {
  require_curve_in_domain(*v.mesh, curve);
  return line_integral([&](const Vec3& p) { return interpolate(v, p); }, curve);
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double distance_to_curve(const Vec3& p, const CurveCurrent& curve) {
  if (curve.vertices.size() == 1) return (p - curve.vertices[0]).norm();
  double best = INFINITY;
  for (size_t k = 0; k < curve.segment_count(); ++k) {
    const auto [a, b] = curve.segment(k);
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return best;
}

namespace {

double directed_hausdorff(const CurveCurrent& a, const CurveCurrent& b, double step) {
  double worst = 0.0;
  for (size_t k = 0; k < a.segment_count(); ++k) {
    const auto [p, q] = a.segment(k);
    const int n = std::max(1, int(std::ceil((q - p).norm() / step)));
    for (int s = 0; s <= n; ++s) worst = std::max(worst, distance_to_curve(p + (q - p) * (double(s) / n), b));
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const CurveCurrent& a, const CurveCurrent& b, double step) {
  return std::max(directed_hausdorff(a, b, step), directed_hausdorff(b, a, step));
}

}  // namespace glmeissner
