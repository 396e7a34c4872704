#include "glmeissner/fields.hpp"

#include <algorithm>
#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/parallel.hpp"

namespace glmeissner {

namespace {

Vec3 slot_offset(Storage s, int d, double h) {
  Vec3 off = Vec3::Zero();
  switch (s) {
    case Storage::kNode:
      break;
    case Storage::kEdge:
      off[d] = 0.5 * h;
      break;
    case Storage::kFace:
      off = Vec3::Constant(0.5 * h);
      off[d] = 0.0;
      break;
    case Storage::kCell:
      off = Vec3::Constant(0.5 * h);
      break;
  }
  return off;
}

// Trilinear interpolation of one slot lattice; absent slots count as zero.
double trilinear(const Grid& g, const std::vector<double>& vals, const Vec3& off, const Vec3& p) {
  const Vec3 t = (p - g.origin - off) / g.h;
  std::array<int, 3> i0{};
  std::array<double, 3> f{};
  for (int d = 0; d < 3; ++d) {
    int i = int(std::floor(t[d]));
    i = std::max(0, std::min(i, g.n[d] - 2));
    i0[d] = i;
    f[d] = std::clamp(t[d] - i, 0.0, 1.0);
  }
  double acc = 0.0;
  for (int k = 0; k < 8; ++k) {
    const int di = k & 1, dj = (k >> 1) & 1, dk = (k >> 2) & 1;
    const double w = (di ? f[0] : 1 - f[0]) * (dj ? f[1] : 1 - f[1]) * (dk ? f[2] : 1 - f[2]);
    if (w == 0.0) continue;
    acc += w * vals[g.index(i0[0] + di, i0[1] + dj, i0[2] + dk)];
  }
  return acc;
}

}  // namespace

const char* storage_name(Storage s) {
  switch (s) {
    case Storage::kNode: return "node";
    case Storage::kEdge: return "edge";
    case Storage::kFace: return "face";
    case Storage::kCell: return "cell";
  }
  return "?";
}

ScalarField::ScalarField(MeshPtr m, Storage s, double fill)
    : mesh(std::move(m)), storage(s), values(mesh->grid().size(), fill) {}

VectorField::VectorField(MeshPtr m, Storage s, double fill) : mesh(std::move(m)), storage(s) {
  const Index n = mesh->grid().size();
  for (auto& comp : c) comp.assign(n, fill);
}

VectorField& VectorField::operator+=(const VectorField& o) {
  axpy(1.0, o);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  axpy(-1.0, o);
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& comp : c)
    for (double& x : comp) x *= s;
  return *this;
}

void VectorField::axpy(double a, const VectorField& x) {
  require_same_mesh(mesh, x.mesh);
  if (storage != x.storage) throw Error(ErrorCode::kWrongStorage, "storage mismatch in axpy");
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < c[d].size(); ++i) c[d][i] += a * x.c[d][i];
}

bool VectorField::all_finite() const {
  for (const auto& comp : c)
    for (double x : comp)
      if (!std::isfinite(x)) return false;
  return true;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

ComplexField::ComplexField(MeshPtr m, Complex fill) : mesh(std::move(m)), values(mesh->grid().size(), fill) {}

void require_same_mesh(const MeshPtr& a, const MeshPtr& b) {
  if (a.get() != b.get()) throw Error(ErrorCode::kMeshMismatch, "fields live on different meshes");
}

Vec3 slot_position(const Grid& g, Storage s, int d, Index i) { return g.position(i) + slot_offset(s, d, g.h); }

bool slot_exists(const Grid& g, Storage s, int d, Index i) {
  switch (s) {
    case Storage::kNode: return true;
    case Storage::kEdge: return g.has_edge(d, i);
    case Storage::kFace: return g.has_face(d, i);
    case Storage::kCell: return g.has_cell(i);
  }
  return false;
}

VectorField gradient(const ScalarField& s) {
  if (s.storage != Storage::kNode) throw Error(ErrorCode::kWrongStorage, "gradient needs a node field");
  const Grid& g = s.mesh->grid();
  VectorField out(s.mesh, Storage::kEdge);
  const double inv_h = 1.0 / g.h;
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    parallel_for(g.size(), [&](Index i) {
      if (g.has_edge(d, i)) out.c[d][i] = (s.values[i + st] - s.values[i]) * inv_h;
    });
  }
  return out;
}

VectorField curl(const VectorField& v) {
  const Grid& g = v.mesh->grid();
  const double inv_h = 1.0 / g.h;
  if (v.storage == Storage::kEdge) {
    VectorField out(v.mesh, Storage::kFace);
    for (int d = 0; d < 3; ++d) {
      const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
      const Index s1 = g.stride(d1), s2 = g.stride(d2);
      parallel_for(g.size(), [&](Index i) {
        if (!g.has_face(d, i)) return;
        out.c[d][i] = ((v.c[d2][i + s1] - v.c[d2][i]) - (v.c[d1][i + s2] - v.c[d1][i])) * inv_h;
      });
    }
    return out;
  }
  if (v.storage == Storage::kFace) return curl_transpose(v);
  throw Error(ErrorCode::kWrongStorage, "curl needs an edge or face field");
}

VectorField curl_transpose(const VectorField& f) {
  if (f.storage != Storage::kFace) throw Error(ErrorCode::kWrongStorage, "dual curl needs a face field");
  const Grid& g = f.mesh->grid();
  const double inv_h = 1.0 / g.h;
  VectorField out(f.mesh, Storage::kEdge);
  auto face = [&](int d, Index i, int ci, int cd) -> double {
    // Face d at node i shifted by -1 along axis cd (if cd >= 0).
    if (cd >= 0) {
      if (ci == 0) return 0.0;
      i -= g.stride(cd);
    }
    return g.has_face(d, i) ? f.c[d][i] : 0.0;
  };
  for (int d = 0; d < 3; ++d) {
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    parallel_for(g.size(), [&](Index i) {
      if (!g.has_edge(d, i)) return;
      const auto ijk = g.ijk(i);
      const double a = face(d2, i, ijk[d1], -1) - face(d2, i, ijk[d1], d1);
      const double b = face(d1, i, ijk[d2], -1) - face(d1, i, ijk[d2], d2);
      out.c[d][i] = (a - b) * inv_h;
    });
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  const Grid& g = v.mesh->grid();
  const double inv_h = 1.0 / g.h;
  if (v.storage == Storage::kEdge) {
    ScalarField out(v.mesh, Storage::kNode);
    parallel_for(g.size(), [&](Index i) {
      const auto ijk = g.ijk(i);
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) {
        if (g.has_edge(d, i)) acc += v.c[d][i];
        if (ijk[d] > 0) acc -= v.c[d][i - g.stride(d)];
      }
      out.values[i] = acc * inv_h;
    });
    return out;
  }
  if (v.storage == Storage::kFace) {
    ScalarField out(v.mesh, Storage::kCell);
    parallel_for(g.size(), [&](Index i) {
      if (!g.has_cell(i)) return;
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) acc += v.c[d][i + g.stride(d)] - v.c[d][i];
      out.values[i] = acc * inv_h;
    });
    return out;
  }
  throw Error(ErrorCode::kWrongStorage, "divergence needs an edge or face field");
}

EdgeComplexField covariant_gradient(const ComplexField& u, const VectorField& a) {
  require_same_mesh(u.mesh, a.mesh);
  if (a.storage != Storage::kEdge) throw Error(ErrorCode::kWrongStorage, "A must be edge-stored");
  const Grid& g = u.mesh->grid();
  EdgeComplexField out{u.mesh, {}};
  const double h = g.h;
  for (int d = 0; d < 3; ++d) {
    out.c[d].assign(g.size(), Complex(0, 0));
    const Index st = g.stride(d);
    parallel_for(g.size(), [&](Index i) {
      if (!g.has_edge(d, i)) return;
      const Complex link = std::polar(1.0, -h * a.c[d][i]);
      out.c[d][i] = (u.values[i + st] * link - u.values[i]) / h;
    });
  }
  return out;
}

ScalarField sample_scalar(const MeshPtr& mesh, const std::function<double(const Vec3&)>& f) {
  ScalarField out(mesh, Storage::kNode);
  const Grid& g = mesh->grid();
  for (Index i = 0; i < g.size(); ++i) out.values[i] = f(g.position(i));
  return out;
}

VectorField sample_field(const MeshPtr& mesh, Storage storage, const std::function<Vec3(const Vec3&)>& f) {
  if (storage == Storage::kCell) throw Error(ErrorCode::kWrongStorage, "vector fields are not cell-stored");
  VectorField out(mesh, storage);
  const Grid& g = mesh->grid();
  if (storage == Storage::kNode) {
    for (Index i = 0; i < g.size(); ++i) out.set(i, f(g.position(i)));
    return out;
  }
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i)
      if (slot_exists(g, storage, d, i)) out.c[d][i] = f(slot_position(g, storage, d, i))[d];
  return out;
}

ComplexField sample_complex(const MeshPtr& mesh, const std::function<Complex(const Vec3&)>& f) {
  ComplexField out(mesh);
  const Grid& g = mesh->grid();
  for (Index i = 0; i < g.size(); ++i) out.values[i] = f(g.position(i));
  return out;
}

Vec3 interpolate(const VectorField& v, const Vec3& p) {
  const Grid& g = v.mesh->grid();
  Vec3 out;
  for (int d = 0; d < 3; ++d) out[d] = trilinear(g, v.c[d], slot_offset(v.storage, d, g.h), p);
  return out;
}

double interpolate(const ScalarField& s, const Vec3& p) {
  const Grid& g = s.mesh->grid();
  return trilinear(g, s.values, slot_offset(s.storage, 0, g.h), p);
}

VectorField to_nodes(const VectorField& v) {
  if (v.storage == Storage::kNode) return v;
  const Grid& g = v.mesh->grid();
  VectorField out(v.mesh, Storage::kNode);
  for (int d = 0; d < 3; ++d) {
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    parallel_for(g.size(), [&](Index i) {
      const auto ijk = g.ijk(i);
      double acc = 0.0;
      int cnt = 0;
      if (v.storage == Storage::kEdge) {
        if (g.has_edge(d, i)) acc += v.c[d][i], ++cnt;
        if (ijk[d] > 0) acc += v.c[d][i - g.stride(d)], ++cnt;
      } else {
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            if ((a && ijk[d1] == 0) || (b && ijk[d2] == 0)) continue;
            const Index j = i - a * g.stride(d1) - b * g.stride(d2);
            if (!g.has_face(d, j)) continue;
            acc += v.c[d][j];
            ++cnt;
          }
      }
      out.c[d][i] = cnt ? acc / cnt : 0.0;
    });
  }
  return out;
}

double integrate(const ScalarField& s) {
  const MeshPtr& m = s.mesh;
  const Grid& g = m->grid();
  const double vol = g.h * g.h * g.h;
  if (s.storage == Storage::kNode) {
    const auto& w = m->node_weights();
    return vol * deterministic_sum(g.size(), [&](Index i) { return w[i] * s.values[i]; });
  }
  if (s.storage == Storage::kCell) {
    return vol * deterministic_sum(g.size(), [&](Index i) {
      if (!g.has_cell(i) || s.values[i] == 0.0) return 0.0;
      const Vec3 c = slot_position(g, Storage::kCell, 0, i);
      return cube_volume_fraction(m->shape(), c, g.h) * s.values[i];
    });
  }
  throw Error(ErrorCode::kWrongStorage, "integrate needs a node or cell scalar field");
}

double integrate(const MeshPtr& mesh, const std::function<double(const Vec3&)>& f) {
  const Grid& g = mesh->grid();
  const auto& w = mesh->node_weights();
  return g.h * g.h * g.h * deterministic_sum(g.size(), [&](Index i) {
           return w[i] > 0 ? w[i] * f(g.position(i)) : 0.0;
         });
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_mesh(a.mesh, b.mesh);
  if (a.storage != b.storage) throw Error(ErrorCode::kWrongStorage, "storage mismatch in inner product");
  const DomainMesh& m = *a.mesh;
  const Grid& g = m.grid();
  double acc = 0.0;
  for (int d = 0; d < 3; ++d) {
    const std::vector<double>* w = nullptr;
    switch (a.storage) {
      case Storage::kNode: w = &m.node_weights(); break;
      case Storage::kEdge: w = &m.edge_weights(d); break;
      case Storage::kFace: w = &m.face_weights(d); break;
      case Storage::kCell: throw Error(ErrorCode::kWrongStorage, "cell vector fields are not supported");
    }
    acc += deterministic_sum(g.size(), [&](Index i) { return (*w)[i] * a.c[d][i] * b.c[d][i]; });
  }
  return acc * g.h * g.h * g.h;
}

double norm_l2(const VectorField& v) { return std::sqrt(inner(v, v)); }

double inner_box(const VectorField& a, const VectorField& b) {
  require_same_mesh(a.mesh, b.mesh);
  const Grid& g = a.mesh->grid();
  double acc = 0.0;
  for (int d = 0; d < 3; ++d)
    acc += deterministic_sum(g.size(), [&](Index i) { return a.c[d][i] * b.c[d][i]; });
  return acc * g.h * g.h * g.h;
}

double max_abs_in_omega(const ScalarField& s) {
  const auto& w = s.mesh->node_weights();
  double m = 0.0;
  for (size_t i = 0; i < s.values.size(); ++i)
    if (w[i] > 0) m = std::max(m, std::abs(s.values[i]));
  return m;
}

}  // namespace glmeissner
