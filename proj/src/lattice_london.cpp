// Discrete London minimization on the padded box. The lattice Meissner state
// it produces satisfies its Euler-Lagrange equations to solver tolerance,
// which is what makes the discrete energy splitting consistent.
#include <cmath>

#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"
#include "glmeissner/parallel.hpp"

namespace glmeissner {

namespace {

// Coulomb gauge penalty weight; with 1 the A-block is the vector Laplacian.
constexpr double kGauge = 1.0;

struct Problem {
  const DomainMesh& mesh;
  const Grid& g;
  Index n;
  double h;
  std::vector<char> phi_active;
  std::array<std::vector<char>, 3> edge_exists;
  std::array<std::vector<char>, 3> face_exists;

  explicit Problem(const DomainMesh& m) : mesh(m), g(m.grid()), n(m.grid().size()), h(m.grid().h) {
    phi_active.assign(n, 0);
    for (int d = 0; d < 3; ++d) {
      edge_exists[d].assign(n, 0);
      face_exists[d].assign(n, 0);
      for (Index i = 0; i < n; ++i) {
        edge_exists[d][i] = g.has_edge(d, i);
        face_exists[d][i] = g.has_face(d, i);
        if (m.edge_weight(d, i) > 0) {
          phi_active[i] = 1;
          phi_active[i + g.stride(d)] = 1;
        }
      }
    }
  }

  // Packed layout: [A_x | A_y | A_z | phi], each block n long.
  double* A(std::vector<double>& v, int d) const { return v.data() + d * n; }
  const double* A(const std::vector<double>& v, int d) const { return v.data() + d * n; }
  double* phi(std::vector<double>& v) const { return v.data() + 3 * n; }
  const double* phi(const std::vector<double>& v) const { return v.data() + 3 * n; }

  void curl_edges(const std::vector<double>& x, std::array<std::vector<double>, 3>& f) const {
    const double ih = 1.0 / h;
    for (int d = 0; d < 3; ++d) {
      const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
      const Index s1 = g.stride(d1), s2 = g.stride(d2);
      const double* a1 = A(x, d1);
      const double* a2 = A(x, d2);
      double* out = f[d].data();
      const char* ex = face_exists[d].data();
      parallel_for(n, [&](Index i) {
        out[i] = ex[i] ? ((a2[i + s1] - a2[i]) - (a1[i + s2] - a1[i])) * ih : 0.0;
      });
    }
  }

  // Adjoint of curl_edges; accumulates into y.
  void curl_transpose_add(const std::array<std::vector<double>, 3>& f, std::vector<double>& y) const {
    const double ih = 1.0 / h;
    for (int d = 0; d < 3; ++d) {
      const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
      const Index s1 = g.stride(d1), s2 = g.stride(d2);
      double* out = A(y, d);
      const char* ex = edge_exists[d].data();
      parallel_for(n, [&](Index i) {
        if (!ex[i]) return;
        const auto c = g.ijk(i);
        const double fd2 = f[d2][i] - (c[d1] > 0 ? f[d2][i - s1] : 0.0);
        const double fd1 = f[d1][i] - (c[d2] > 0 ? f[d1][i - s2] : 0.0);
        out[i] += (fd2 - fd1) * ih;
      });
    }
  }

  void div_edges(const std::vector<double>& x, std::vector<double>& dv) const {
    const double ih = 1.0 / h;
    parallel_for(n, [&](Index i) {
      const auto c = g.ijk(i);
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double* a = A(x, d);
        if (edge_exists[d][i]) acc += a[i];
        if (c[d] > 0) acc -= a[i - g.stride(d)];
      }
      dv[i] = acc * ih;
    });
  }

  void apply(const std::vector<double>& x, std::vector<double>& y, std::array<std::vector<double>, 3>& f,
             std::array<std::vector<double>, 3>& r, std::vector<double>& dv) const {
    const double ih = 1.0 / h;
    const double* ph = phi(x);
    for (int d = 0; d < 3; ++d) {
      const double* a = A(x, d);
      const double* w = mesh.edge_weights(d).data();
      const Index st = g.stride(d);
      double* rd = r[d].data();
      double* yd = A(y, d);
      parallel_for(n, [&](Index i) {
        rd[i] = w[i] > 0 ? w[i] * (a[i] - (ph[i + st] - ph[i]) * ih) : 0.0;
        yd[i] = rd[i];
      });
    }
    curl_edges(x, f);
    curl_transpose_add(f, y);
    div_edges(x, dv);
    for (int d = 0; d < 3; ++d) {
      double* yd = A(y, d);
      const Index st = g.stride(d);
      const char* ex = edge_exists[d].data();
      parallel_for(n, [&](Index i) {
        if (ex[i]) yd[i] += kGauge * (dv[i] - dv[i + st]) * ih;
      });
    }
    double* yp = phi(y);
    parallel_for(n, [&](Index i) {
      if (!phi_active[i]) {
        yp[i] = 0.0;
        return;
      }
      const auto c = g.ijk(i);
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) {
        acc += r[d][i];
        if (c[d] > 0) acc -= r[d][i - g.stride(d)];
      }
      yp[i] = acc * ih;
    });
  }

  std::vector<double> diagonal() const {
    std::vector<double> dg(4 * n, 1.0);
    const double ih2 = 1.0 / (h * h);
    for (int d = 0; d < 3; ++d) {
      const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
      for (Index i = 0; i < n; ++i) {
        if (!edge_exists[d][i]) continue;
        const auto c = g.ijk(i);
        int faces = face_exists[d1][i] + face_exists[d2][i];
        if (c[d2] > 0) faces += face_exists[d1][i - g.stride(d2)];
        if (c[d1] > 0) faces += face_exists[d2][i - g.stride(d1)];
        dg[d * n + i] = mesh.edge_weight(d, i) + faces * ih2 + 2 * kGauge * ih2;
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (!phi_active[i]) continue;
      const auto c = g.ijk(i);
      double acc = 0.0;
      for (int d = 0; d < 3; ++d) {
        acc += mesh.edge_weight(d, i);
        if (c[d] > 0) acc += mesh.edge_weight(d, i - g.stride(d));
      }
      dg[3 * n + i] = acc * ih2;
    }
    return dg;
  }

  bool active(Index k) const {
    if (k >= 3 * n) return phi_active[k - 3 * n];
    return edge_exists[k / n][k % n];
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return deterministic_sum(Index(a.size()), [&](Index i) { return a[i] * b[i]; });
}

}  // namespace

LatticeMeissner solve_lattice_london(const MeshPtr& mesh_ptr, const VectorFunction& h0ex, double tol,
                                     int max_iters) {
  const DomainMesh& mesh = *mesh_ptr;
  const Problem P(mesh);
  const Index n = P.n;
  const double h = P.h;

  LatticeMeissner out;
  out.H_faces = sample_field(mesh_ptr, Storage::kFace, h0ex);

  std::vector<double> b(4 * n, 0.0), x(4 * n, 0.0);
  P.curl_transpose_add(out.H_faces.c, b);
  const std::vector<double> dg = P.diagonal();
  std::vector<char> mask(4 * n);
  for (Index k = 0; k < 4 * n; ++k) mask[k] = P.active(k);

  std::array<std::vector<double>, 3> f, rr;
  for (int d = 0; d < 3; ++d) {
    f[d].assign(n, 0.0);
    rr[d].assign(n, 0.0);
  }
  std::vector<double> dv(n, 0.0), r = b, z(4 * n), p(4 * n), q(4 * n);
  for (Index k = 0; k < 4 * n; ++k) {
    if (!mask[k]) r[k] = 0.0;
    z[k] = r[k] / dg[k];
  }
  p = z;
  double rz = dot(r, z);
  const double bnorm = std::sqrt(dot(b, b));
  int it = 0;
  double rnorm = std::sqrt(dot(r, r));
  if (bnorm > 0) {
    for (; it < max_iters && rnorm > tol * bnorm; ++it) {
      P.apply(p, q, f, rr, dv);
      for (Index k = 0; k < 4 * n; ++k)
        if (!mask[k]) q[k] = 0.0;
      const double pq = dot(p, q);
      if (!(pq > 0)) throw Error(ErrorCode::kSolverDiverged, "lattice London: loss of positive definiteness");
      const double alpha = rz / pq;
      parallel_for(4 * n, [&](Index k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * q[k];
        z[k] = r[k] / dg[k];
      });
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      parallel_for(4 * n, [&](Index k) { p[k] = z[k] + beta * p[k]; });
      rnorm = std::sqrt(dot(r, r));
    }
    if (rnorm > tol * bnorm)
      throw Error(ErrorCode::kSolverDiverged, "lattice London: iteration cap hit");
  }
  out.iterations = it;
  out.residual = bnorm > 0 ? rnorm / bnorm : 0.0;

  const Grid& g = mesh.grid();
  out.A = VectorField(mesh_ptr, Storage::kEdge);
  out.j0 = VectorField(mesh_ptr, Storage::kEdge);
  const double* ph = P.phi(x);
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    const double* a = P.A(x, d);
    for (Index i = 0; i < n; ++i) {
      if (!g.has_edge(d, i)) continue;
      const double pa = P.phi_active[i] ? ph[i] : 0.0;
      const double pb = P.phi_active[i + st] ? ph[i + st] : 0.0;
      out.A.c[d][i] = a[i] - (pb - pa) / h;
      if (mesh.edge_weight(d, i) > 0) out.j0.c[d][i] = out.A.c[d][i];
    }
  }
  const double vol = h * h * h;
  out.kinetic = 0.5 * inner(out.j0, out.j0);
  VectorField field = curl(out.A);
  field -= out.H_faces;
  out.field = 0.5 * deterministic_sum(n, [&](Index i) {
                return field.c[0][i] * field.c[0][i] + field.c[1][i] * field.c[1][i] +
                       field.c[2][i] * field.c[2][i];
              }) * vol;
  out.J0 = out.kinetic + out.field;
  return out;
}

}  // namespace glmeissner
