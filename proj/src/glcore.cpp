#include "glmeissner/glcore.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "gl_kernel.hpp"
#include "glmeissner/error.hpp"
#include "glmeissner/parallel.hpp"

namespace glmeissner {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

double wrap(double a) {
  // (-pi, pi]
  a = std::remainder(a, 2 * M_PI);
  return a <= -M_PI ? a + 2 * M_PI : a;
}

const MeissnerData& require_meissner(const GLState& s) {
  if (!s.meissner || !s.meissner->has_lattice)
    throw Error(ErrorCode::kMissingMeissnerData, "state has no lattice Meissner data");
  return *s.meissner;
}

}  // namespace

bool node_active(const DomainMesh& mesh, Index i) {
  if (mesh.node_weight(i) > 0) return true;
  const Grid& g = mesh.grid();
  const auto c = g.ijk(i);
  for (int d = 0; d < 3; ++d) {
    if (g.has_edge(d, i) && mesh.edge_weight(d, i) > 0) return true;
    if (c[d] > 0 && mesh.edge_weight(d, i - g.stride(d)) > 0) return true;
  }
  return false;
}

void GLState::validate() const {
  if (!mesh) throw Error(ErrorCode::kValidationError, "state without mesh");
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::kInvalidEpsilon, "eps must lie in (0, 1)");
  if (!(hex >= 0) || !std::isfinite(hex)) throw Error(ErrorCode::kValidationError, "h_ex must be finite and >= 0");
  require_same_mesh(mesh, u.mesh);
  require_same_mesh(mesh, A.mesh);
  if (A.storage != Storage::kEdge) throw Error(ErrorCode::kWrongStorage, "A' must be edge-stored");
  if (meissner) require_same_mesh(mesh, meissner->mesh);
  for (const Complex& z : u.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(ErrorCode::kValidationError, "u has non-finite values");
  if (!A.all_finite()) throw Error(ErrorCode::kValidationError, "A' has non-finite values");
}

GLState meissner_state(const MeshPtr& mesh, std::shared_ptr<const MeissnerData> meissner, double eps, double hex) {
  GLState s;
  s.mesh = mesh;
  s.u = ComplexField(mesh, Complex(1.0, 0.0));
  s.A = VectorField(mesh, Storage::kEdge);
  s.eps = eps;
  s.hex = hex;
  s.meissner = std::move(meissner);
  s.validate();
  return s;
}

namespace detail {

TermSums gl_terms(const GLState& s, ComplexField* du, VectorField* dA, GLWorkspace& ws) {
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const Index n = g.size();
  const double h = g.h, h3 = h * h * h;
  const double hex = s.hex;
  const bool grad = du != nullptr;
  static const std::vector<double> kNoCurrent;
  const MeissnerData* md = (s.meissner && s.meissner->has_lattice) ? s.meissner.get() : nullptr;
  const std::vector<Complex>& u = s.u.values;

  if (grad) {
    for (int d = 0; d < 3; ++d) {
      ws.cp[d].resize(n);
      ws.cq[d].resize(n);
    }
  }
  for (int d = 0; d < 3; ++d) ws.face[d].resize(n);
  if (grad) {
    *du = ComplexField(s.mesh);
    *dA = VectorField(s.mesh, Storage::kEdge);
  }

  TermSums out;
  // Edge terms: kinetic, vorticity pairing, R0.
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    const double* w = mesh.edge_weights(d).data();
    const double* a = s.A.c[d].data();
    const double* j0 = md ? md->curlB0.c[d].data() : nullptr;
    const auto sums = deterministic_sums<3>(n, [&](Index i, double* acc) {
      if (!(w[i] > 0)) {
        if (grad) ws.cp[d][i] = ws.cq[d][i] = 0.0;
        return;
      }
      const Complex up = u[i], uq = u[i + st];
      const Complex z = std::polar(1.0, -h * a[i]);
      const Complex m = uq * z;
      const Complex r = m - up;
      const Complex pm = std::conj(up) * m;
      const double jj = pm.imag() / h;
      const double je = j0 ? j0[i] : 0.0;
      acc[0] += 0.5 * w[i] * h * std::norm(r);
      const double cv = -hex * w[i] * h3 * je;
      acc[1] += cv * (jj + a[i]);
      const double cr = 0.5 * hex * hex * w[i] * h3 * je * je;
      acc[2] += cr * (0.5 * (std::norm(up) + std::norm(uq)) - 1.0);
      if (grad) {
        const Complex I(0.0, 1.0);
        ws.cp[d][i] = -w[i] * h * r + cv * (-I * m / h) + cr * up;
        ws.cq[d][i] = w[i] * h * std::conj(z) * r + cv * (I * up * std::conj(z) / h) + cr * uq;
        dA->c[d][i] = -w[i] * h3 * jj + cv * (1.0 - pm.real());
      }
    });
    out.kinetic += sums[0];
    out.vorticity += sums[1];
    out.r0 += sums[2];
  }

  // Faces: |curl A'|^2 split by the face volume fraction.
  {
    const double ih = 1.0 / h;
    for (int d = 0; d < 3; ++d) {
      const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
      const Index s1 = g.stride(d1), s2 = g.stride(d2);
      const double* a1 = s.A.c[d1].data();
      const double* a2 = s.A.c[d2].data();
      const double* fw = mesh.face_weights(d).data();
      double* fc = ws.face[d].data();
      const auto sums = deterministic_sums<2>(n, [&](Index i, double* acc) {
        if (!g.has_face(d, i)) {
          fc[i] = 0.0;
          return;
        }
        const double c = ((a2[i + s1] - a2[i]) - (a1[i + s2] - a1[i])) * ih;
        const double e = 0.5 * h3 * c * c;
        acc[0] += fw[i] * e;
        acc[1] += (1.0 - fw[i]) * e;
        fc[i] = h3 * c;
      });
      out.field_inside += sums[0];
      out.field_outside += sums[1];
    }
    if (grad) {
      for (int d = 0; d < 3; ++d) {
        const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
        const Index s1 = g.stride(d1), s2 = g.stride(d2);
        double* da = dA->c[d].data();
        parallel_for(n, [&](Index i) {
          if (!g.has_edge(d, i)) return;
          const auto c = g.ijk(i);
          // Faces (d2 at i) and (d2 at i - s1) contain the edge with +/-;
          // likewise (d1 at i - s2) and (d1 at i).
          double acc = ws.face[d2][i] - ws.face[d1][i];
          if (c[d1] > 0) acc -= ws.face[d2][i - s1];
          if (c[d2] > 0) acc += ws.face[d1][i - s2];
          da[i] += acc * ih;
        });
      }
    }
  }

  // Nodes: potential and the gather of edge contributions.
  {
    const double* v = mesh.node_weights().data();
    const double k = 1.0 / (4.0 * s.eps * s.eps);
    Complex* gu = grad ? du->values.data() : nullptr;
    out.potential = deterministic_sum(n, [&](Index i) {
      double e = 0.0;
      const double m = 1.0 - std::norm(u[i]);
      if (v[i] > 0) e = v[i] * h3 * k * m * m;
      if (grad) {
        Complex gi = v[i] > 0 ? -v[i] * h3 * 4.0 * k * m * u[i] : Complex(0.0);
        const auto c = g.ijk(i);
        for (int d = 0; d < 3; ++d) {
          if (g.has_edge(d, i)) gi += ws.cp[d][i];
          if (c[d] > 0) gi += ws.cq[d][i - g.stride(d)];
        }
        gu[i] = gi;
      }
      return e;
    });
  }
  return out;
}

}  // namespace detail

double free_energy(const GLState& s) {
  s.validate();
  GLState plain = s;
  plain.hex = 0.0;
  detail::GLWorkspace ws;
  const detail::TermSums t = detail::gl_terms(plain, nullptr, nullptr, ws);
  return t.kinetic + t.potential + t.field_inside;
}

EnergyReport gl_total_energy(const GLState& s) {
  s.validate();
  const MeissnerData& md = require_meissner(s);
  detail::GLWorkspace ws;
  const detail::TermSums t = detail::gl_terms(s, nullptr, nullptr, ws);
  EnergyReport r;
  r.kinetic = t.kinetic;
  r.potential = t.potential;
  r.field_inside = t.field_inside;
  r.field_outside = t.field_outside;
  r.free_energy = t.kinetic + t.potential + t.field_inside;
  r.meissner_term = s.hex * s.hex * md.J0;
  r.vorticity_term = t.vorticity;
  r.R0 = t.r0;
  r.total = r.meissner_term + r.free_energy + r.field_outside + r.vorticity_term + r.R0;
  return r;
}

double gl_direct_energy(const GLState& s) {
  s.validate();
  const MeissnerData& md = require_meissner(s);
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const double h = g.h, h3 = h * h * h;
  VectorField A = s.A;
  A.axpy(s.hex, md.lattice.A);
  double kin = 0.0;
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    kin += deterministic_sum(g.size(), [&](Index i) {
      const double w = mesh.edge_weight(d, i);
      if (!(w > 0)) return 0.0;
      const Complex D = (s.u[i + st] * std::polar(1.0, -h * A.c[d][i]) - s.u[i]) / h;
      return 0.5 * w * h3 * std::norm(D);
    });
  }
  const double k = 1.0 / (4.0 * s.eps * s.eps);
  const double pot = deterministic_sum(g.size(), [&](Index i) {
    const double m = 1.0 - std::norm(s.u[i]);
    return mesh.node_weight(i) * h3 * k * m * m;
  });
  const VectorField H = curl(A);
  double field = 0.0;
  for (int d = 0; d < 3; ++d)
    field += deterministic_sum(g.size(), [&](Index i) {
      if (!g.has_face(d, i)) return 0.0;
      const double c = H.c[d][i] - s.hex * md.lattice.H_faces.c[d][i];
      return 0.5 * h3 * c * c;
    });
  return kin + pot + field;
}

// ---------------------------------------------------------------- vorticity

VorticityField vorticity(const MeshPtr& mesh_ptr, const ComplexField& u, const VectorField& A) {
  require_same_mesh(mesh_ptr, u.mesh);
  require_same_mesh(mesh_ptr, A.mesh);
  if (A.storage != Storage::kEdge) throw Error(ErrorCode::kWrongStorage, "vorticity needs an edge-stored A");
  const DomainMesh& mesh = *mesh_ptr;
  const Grid& g = mesh.grid();
  const double h = g.h;
  const Index n = g.size();
  VorticityField out;
  out.mesh = mesh_ptr;
  // Edge phase increments theta_e + h A_e, with theta_e = arg(conj(u_p) u_q e^{-ihA}).
  std::array<std::vector<double>, 3> inc;
  for (int d = 0; d < 3; ++d) {
    inc[d].assign(n, 0.0);
    const Index st = g.stride(d);
    parallel_for(n, [&](Index i) {
      if (!(mesh.edge_weight(d, i) > 0)) return;
      const double a = A.c[d][i];
      inc[d][i] = wrap(std::arg(std::conj(u[i]) * u[i + st] * std::polar(1.0, -h * a))) + h * a;
    });
  }
  Index zeros = 0;
  for (int d = 0; d < 3; ++d) {
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    const Index s1 = g.stride(d1), s2 = g.stride(d2);
    out.winding[d].assign(n, 0.0);
    out.valid[d].assign(n, 0);
    for (Index i = 0; i < n; ++i) {
      if (!g.has_face(d, i)) continue;
      if (!(mesh.edge_weight(d1, i) > 0 && mesh.edge_weight(d2, i + s1) > 0 && mesh.edge_weight(d1, i + s2) > 0 &&
            mesh.edge_weight(d2, i) > 0))
        continue;
      for (Index c : {i, i + s1, i + s2, i + s1 + s2})
        if (std::abs(u[c]) < 1e-12) ++zeros;
      out.valid[d][i] = 1;
      out.winding[d][i] = inc[d1][i] + inc[d2][i + s1] - inc[d1][i + s2] - inc[d2][i];
    }
  }
  if (zeros > 0)
    throw Error(ErrorCode::kZeroOnPlaquette,
                std::to_string(zeros) + " plaquette corner(s) with |u| < 1e-12; winding undefined");
  return out;
}

VorticityField vorticity(const GLState& s) {
  s.validate();
  return vorticity(s.mesh, s.u, s.A);
}

double VorticityField::closedness_defect() const {
  const Grid& g = mesh->grid();
  double worst = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (!g.has_cell(i)) continue;
    bool ok = true;
    double acc = 0.0;
    for (int d = 0; d < 3 && ok; ++d) {
      const Index j = i + g.stride(d);
      ok = valid[d][i] && valid[d][j];
      acc += winding[d][j] - winding[d][i];
    }
    if (ok) worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

double VorticityField::total_turns() const {
  double acc = 0.0;
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < winding[d].size(); ++i)
      if (valid[d][i]) acc += std::abs(winding[d][i]);
  return acc / (2 * M_PI);
}

std::vector<std::pair<int, Index>> VorticityField::vortex_faces() const {
  std::vector<std::pair<int, Index>> out;
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < winding[d].size(); ++i)
      if (valid[d][i] && std::abs(winding[d][i]) > M_PI) out.emplace_back(d, Index(i));
  return out;
}

VectorField supercurrent(const MeshPtr& mesh_ptr, const ComplexField& u, const VectorField& A) {
  require_same_mesh(mesh_ptr, u.mesh);
  require_same_mesh(mesh_ptr, A.mesh);
  const DomainMesh& mesh = *mesh_ptr;
  const Grid& g = mesh.grid();
  const double h = g.h;
  VectorField j(mesh_ptr, Storage::kEdge);
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    parallel_for(g.size(), [&](Index i) {
      if (!(mesh.edge_weight(d, i) > 0)) return;
      j.c[d][i] = (std::conj(u[i]) * u[i + st] * std::polar(1.0, -h * A.c[d][i])).imag() / h;
    });
  }
  return j;
}

VectorField supercurrent(const GLState& s) {
  s.validate();
  return supercurrent(s.mesh, s.u, s.A);
}

// --------------------------------------------------------------- Hodge

namespace {

// Subcomplex of Omega: edges with w > 0, their end nodes, faces whose four
// edges are Omega edges, cells whose six faces are Omega faces.
struct Subcomplex {
  std::vector<Index> nodes, cells;
  std::vector<std::int32_t> node_id, cell_id;
  std::array<std::vector<std::int32_t>, 3> edge_id, face_id;
  std::vector<std::pair<int, Index>> edges, faces;
};

Subcomplex omega_complex(const DomainMesh& mesh) {
  const Grid& g = mesh.grid();
  const Index n = g.size();
  Subcomplex K;
  K.node_id.assign(n, -1);
  K.cell_id.assign(n, -1);
  for (int d = 0; d < 3; ++d) {
    K.edge_id[d].assign(n, -1);
    K.face_id[d].assign(n, -1);
  }
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < n; ++i)
      if (mesh.edge_weight(d, i) > 0) {
        K.edge_id[d][i] = std::int32_t(K.edges.size());
        K.edges.emplace_back(d, i);
      }
  for (Index i = 0; i < n; ++i)
    if (node_active(mesh, i)) {
      K.node_id[i] = std::int32_t(K.nodes.size());
      K.nodes.push_back(i);
    }
  for (int d = 0; d < 3; ++d) {
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    for (Index i = 0; i < n; ++i) {
      if (!g.has_face(d, i)) continue;
      if (K.edge_id[d1][i] >= 0 && K.edge_id[d2][i] >= 0 && K.edge_id[d1][i + g.stride(d2)] >= 0 &&
          K.edge_id[d2][i + g.stride(d1)] >= 0) {
        K.face_id[d][i] = std::int32_t(K.faces.size());
        K.faces.emplace_back(d, i);
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (!g.has_cell(i)) continue;
    bool ok = true;
    for (int d = 0; d < 3 && ok; ++d) ok = K.face_id[d][i] >= 0 && K.face_id[d][i + g.stride(d)] >= 0;
    if (ok) {
      K.cell_id[i] = std::int32_t(K.cells.size());
      K.cells.push_back(i);
    }
  }
  return K;
}

// Gradient: edges x nodes, (phi_q - phi_p) / h.
SpMat grad_matrix(const Grid& g, const Subcomplex& K) {
  Triplets t;
  for (size_t e = 0; e < K.edges.size(); ++e) {
    const auto [d, i] = K.edges[e];
    t.emplace_back(int(e), K.node_id[i + g.stride(d)], 1.0 / g.h);
    t.emplace_back(int(e), K.node_id[i], -1.0 / g.h);
  }
  SpMat G(Index(K.edges.size()), Index(K.nodes.size()));
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

// Curl: faces x edges.
SpMat curl_matrix(const Grid& g, const Subcomplex& K) {
  Triplets t;
  for (size_t f = 0; f < K.faces.size(); ++f) {
    const auto [d, i] = K.faces[f];
    const int d1 = (d + 1) % 3, d2 = (d + 2) % 3;
    t.emplace_back(int(f), K.edge_id[d2][i + g.stride(d1)], 1.0 / g.h);
    t.emplace_back(int(f), K.edge_id[d2][i], -1.0 / g.h);
    t.emplace_back(int(f), K.edge_id[d1][i + g.stride(d2)], -1.0 / g.h);
    t.emplace_back(int(f), K.edge_id[d1][i], 1.0 / g.h);
  }
  SpMat C(Index(K.faces.size()), Index(K.edges.size()));
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

// Divergence: cells x faces.
SpMat div_matrix(const Grid& g, const Subcomplex& K) {
  Triplets t;
  for (size_t c = 0; c < K.cells.size(); ++c) {
    const Index i = K.cells[c];
    for (int d = 0; d < 3; ++d) {
      t.emplace_back(int(c), K.face_id[d][i + g.stride(d)], 1.0 / g.h);
      t.emplace_back(int(c), K.face_id[d][i], -1.0 / g.h);
    }
  }
  SpMat D(Index(K.cells.size()), Index(K.faces.size()));
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

Eigen::VectorXd solve_spd(const SpMat& M, const Eigen::VectorXd& b, double tol, int& iters, bool singular) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(std::max<Index>(1000, 20 * Index(std::cbrt(double(M.rows())) * 20)));
  cg.compute(M);
  Eigen::VectorXd rhs = b;
  if (singular && rhs.size() > 0) rhs.array() -= rhs.mean();
  Eigen::VectorXd x = cg.solve(rhs);
  iters += int(cg.iterations());
  if (cg.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorCode::kSolverDiverged, "conjugate gradients did not converge");
  if (singular && x.size() > 0) x.array() -= x.mean();
  return x;
}

}  // namespace

HodgeResult hodge_decompose(const VectorField& A, double tol) {
  if (A.storage != Storage::kEdge) throw Error(ErrorCode::kWrongStorage, "hodge_decompose needs an edge field");
  const MeshPtr& mp = A.mesh;
  const DomainMesh& mesh = *mp;
  const Grid& g = mesh.grid();
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i)
      if (mesh.edge_weight(d, i) > 0 && !std::isfinite(A.c[d][i]))
        throw Error(ErrorCode::kValidationError, "A has non-finite values in Omega");
  const Subcomplex K = omega_complex(mesh);
  if (K.edges.empty()) throw Error(ErrorCode::kEmptyDomain, "no Omega edges");
  Eigen::VectorXd a(Index(K.edges.size()));
  for (size_t e = 0; e < K.edges.size(); ++e) a[Index(e)] = A.c[K.edges[e].first][K.edges[e].second];

  HodgeResult out;
  const SpMat G = grad_matrix(g, K);
  const SpMat L = SpMat(G.transpose() * G);
  const Eigen::VectorXd phi = solve_spd(L, G.transpose() * a, tol, out.iterations, true);
  const Eigen::VectorXd gp = G * phi;
  const Eigen::VectorXd rest = a - gp;

  const SpMat C = curl_matrix(g, K);
  const SpMat D = div_matrix(g, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Index(K.faces.size()));
  Eigen::VectorXd cp = Eigen::VectorXd::Zero(Index(K.edges.size()));
  if (K.faces.size() > 0) {
    const SpMat M = SpMat(C * C.transpose()) + SpMat(D.transpose() * D);
    b = solve_spd(M, C * rest, tol, out.iterations, false);
    cp = C.transpose() * b;
  }

  out.B = VectorField(mp, Storage::kFace);
  out.phi = ScalarField(mp, Storage::kNode);
  out.curl_part = VectorField(mp, Storage::kEdge);
  out.grad_part = VectorField(mp, Storage::kEdge);
  for (size_t f = 0; f < K.faces.size(); ++f) out.B.c[K.faces[f].first][K.faces[f].second] = b[Index(f)];
  for (size_t v = 0; v < K.nodes.size(); ++v) out.phi.values[K.nodes[v]] = phi[Index(v)];
  for (size_t e = 0; e < K.edges.size(); ++e) {
    out.curl_part.c[K.edges[e].first][K.edges[e].second] = cp[Index(e)];
    out.grad_part.c[K.edges[e].first][K.edges[e].second] = gp[Index(e)];
  }
  const double an = a.norm();
  out.residual = an > 0 ? (a - cp - gp).norm() / an : 0.0;
  const double denom = cp.norm() * gp.norm();
  out.orthogonality = denom > 0 ? std::abs(cp.dot(gp)) / denom : 0.0;
  out.phi_mean = phi.size() ? phi.mean() : 0.0;
  if (K.cells.size() > 0) out.div_max = (D * b).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------- vorticity bound

std::vector<VectorFunction> vorticity_test_fields(const Shape& shape) {
  std::vector<VectorFunction> out;
  for (int pk = 0; pk < 4; ++pk)
    for (int c = 0; c < 3; ++c) {
      // curl(psi e_c) = grad(psi) x e_c, psi = F^2 p.
      out.push_back([shape, pk, c](const Vec3& x) -> Vec3 {
        const double F = defining_function(shape, x);
        const Vec3 dF = defining_gradient(shape, x);
        const double p = pk == 0 ? 1.0 : x[pk - 1];
        Vec3 dp = Vec3::Zero();
        if (pk > 0) dp[pk - 1] = 1.0;
        const Vec3 grad_psi = 2.0 * F * p * dF + F * F * dp;
        Vec3 e = Vec3::Zero();
        e[c] = 1.0;
        return grad_psi.cross(e);
      });
    }
  return out;
}

double min_abs_u(const GLState& s) {
  const DomainMesh& mesh = *s.mesh;
  double m = INFINITY;
  for (Index i = 0; i < mesh.grid().size(); ++i)
    if (mesh.node_weight(i) > 0) m = std::min(m, std::abs(s.u[i]));
  return m;
}

VorticityBoundReport check_vorticity_bound(const GLState& s, const std::vector<VectorFunction>& test_fields,
                                           double c) {
  s.validate();
  VorticityBoundReport rep;
  rep.min_abs_u = min_abs_u(s);
  if (rep.min_abs_u < c)
    throw Error(ErrorCode::kVortexPresent, "min |u| = " + std::to_string(rep.min_abs_u) + " below " + std::to_string(c));
  rep.applicable = true;
  rep.free_energy = free_energy(s);
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const double h = g.h, h3 = h * h * h;
  // Smooth vorticity curl(j + A) paired with phi by parts: sum_e w h^3 (j + A)_e (curl phi)_e,
  // with curl phi the dual curl of phi sampled on faces.
  VectorField jA = supercurrent(s);
  jA += s.A;
  for (const auto& phi : test_fields) {
    const VectorField pf = sample_field(s.mesh, Storage::kFace, phi);
    const VectorField cphi = curl_transpose(pf);
    double pairing = 0.0;
    for (int d = 0; d < 3; ++d)
      pairing += deterministic_sum(g.size(), [&](Index i) {
        const double w = mesh.edge_weight(d, i);
        return w > 0 ? w * h3 * jA.c[d][i] * cphi.c[d][i] : 0.0;
      });
    // C^{0,1} norm on Omega nodes: sup |phi| + sup |D phi| by central differences.
    double sup = 0.0, lip = 0.0;
    for (Index i : mesh.interior_nodes()) {
      const Vec3 x = g.position(i);
      sup = std::max(sup, phi(x).norm());
      Eigen::Matrix3d J;
      for (int d = 0; d < 3; ++d) {
        Vec3 e = Vec3::Zero();
        e[d] = 0.5 * h;
        J.col(d) = (phi(x + e) - phi(x - e)) / h;
      }
      lip = std::max(lip, J.norm());
    }
    const double norm = sup + lip;
    rep.pairings.push_back(pairing);
    rep.lip_norms.push_back(norm);
    const double denom = norm * s.eps * rep.free_energy;
    const double ratio = denom > 0 ? std::abs(pairing) / denom : 0.0;
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

// ------------------------------------------------------------------ gauge

GLState gauge_transform(const GLState& s, const ScalarField& chi) {
  require_same_mesh(s.mesh, chi.mesh);
  if (chi.storage != Storage::kNode) throw Error(ErrorCode::kWrongStorage, "gauge function must be node-stored");
  GLState out = s;
  parallel_for(s.mesh->grid().size(), [&](Index i) { out.u.values[i] *= std::polar(1.0, chi.values[i]); });
  out.A += gradient(chi);
  return out;
}

ScalarField coulomb_gauge(const GLState& s, double tol) {
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const Subcomplex K = omega_complex(mesh);
  const SpMat G = grad_matrix(g, K);
  Eigen::VectorXd w(Index(K.edges.size())), a(Index(K.edges.size()));
  for (size_t e = 0; e < K.edges.size(); ++e) {
    w[Index(e)] = mesh.edge_weight(K.edges[e].first, K.edges[e].second);
    a[Index(e)] = s.A.c[K.edges[e].first][K.edges[e].second];
  }
  const SpMat L = SpMat(G.transpose() * w.asDiagonal() * G);
  int iters = 0;
  const Eigen::VectorXd chi = solve_spd(L, -(G.transpose() * w.cwiseProduct(a)), tol, iters, true);
  ScalarField out(s.mesh, Storage::kNode);
  for (size_t v = 0; v < K.nodes.size(); ++v) out.values[K.nodes[v]] = chi[Index(v)];
  return out;
}

double coulomb_defect(const GLState& s) {
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  double worst = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (!node_active(mesh, i)) continue;
    const auto c = g.ijk(i);
    double acc = 0.0;
    for (int d = 0; d < 3; ++d) {
      if (g.has_edge(d, i)) acc += mesh.edge_weight(d, i) * s.A.c[d][i];
      if (c[d] > 0) acc -= mesh.edge_weight(d, i - g.stride(d)) * s.A.c[d][i - g.stride(d)];
    }
    worst = std::max(worst, std::abs(acc) / g.h);
  }
  return worst;
}

double r0_bound(const GLState& s) {
  const MeissnerData& md = require_meissner(s);
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const double h3 = g.h * g.h * g.h;
  double e = 0.0, j4 = 0.0;
  for (int d = 0; d < 3; ++d) {
    const Index st = g.stride(d);
    const auto sums = deterministic_sums<2>(g.size(), [&](Index i, double* acc) {
      const double w = mesh.edge_weight(d, i);
      if (!(w > 0)) return;
      const double m = 0.5 * (std::norm(s.u[i]) + std::norm(s.u[i + st])) - 1.0;
      const double j = md.curlB0.c[d][i];
      acc[0] += w * h3 * m * m;
      acc[1] += w * h3 * j * j * j * j;
    });
    e += sums[0];
    j4 += sums[1];
  }
  const double E_edge = e / (4.0 * s.eps * s.eps);
  return s.hex * s.hex * s.eps * std::sqrt(E_edge) * std::sqrt(j4);
}

}  // namespace glmeissner
