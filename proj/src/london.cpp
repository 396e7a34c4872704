#include "glmeissner/london.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "glmeissner/error.hpp"
#include "glmeissner/parallel.hpp"
#include "layer_potential.hpp"

namespace glmeissner {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Solver = Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>>;

// Triquadratic Lagrange stencil on the 3x3x3 block of interior nodes
// around a point.
struct CellStencil {
  std::array<Index, 27> node{};
  std::array<double, 27> w{};
};

// Image-point rule for a node p outside Omega. With b the closest boundary
// point, nu the normal there and s = |p - b|, the field along the normal line
// t -> b + t nu is modelled by a quadratic through the images t = -L1, -L2:
//   tangential part  q(0) = 0                          (B x nu = 0)
//   normal part      q'(0) = -kappa q(0)               (div B = 0)
// since div B = d_n B_n + kappa B_n once B_t = 0, kappa = div nu.
struct ImageRule {
  Vec3 b, nu;
  double s = 0.0, L1 = 0.0, L2 = 0.0, kappa = 0.0;
  CellStencil image[2];
  double tan[2] = {0, 0};   // B_t(p) = tan . B_t(I)
  double nor[2] = {0, 0};   // B_n(p) = nor . B_n(I)
  double nor_b[2] = {0, 0}; // B_n(b) = nor_b . B_n(I)
  double dir[3] = {0, 0, 0};  // scalar Dirichlet: q(s) = dir0 q(0) + dir1 q(I1) + dir2 q(I2)

  Eigen::Matrix3d vector_map(int k) const {
    const Eigen::Matrix3d nn = nu * nu.transpose();
    return tan[k] * (Eigen::Matrix3d::Identity() - nn) + nor[k] * nn;
  }
  void coefficients() {
    // Quadratic Lagrange basis on the nodes 0, -L1, -L2.
    dir[0] = (s + L1) * (s + L2) / (L1 * L2);
    dir[1] = s * (s + L2) / (L1 * (L1 - L2));
    dir[2] = s * (s + L1) / (L2 * (L2 - L1));
    tan[0] = dir[1];
    tan[1] = dir[2];
    const double det = (1 + kappa * L1) * L2 * L2 - (1 + kappa * L2) * L1 * L1;
    nor_b[0] = L2 * L2 / det;
    nor_b[1] = -L1 * L1 / det;
    nor[0] = (L2 * L2 * (1 - kappa * s) - (1 + kappa * L2) * s * s) / det;
    nor[1] = (-L1 * L1 * (1 - kappa * s) + (1 + kappa * L1) * s * s) / det;
  }
};

double normal_divergence(const Shape& shape, const Vec3& b, double h) {
  if (std::holds_alternative<Box>(shape)) return 0.0;
  const double d = 1e-4 * h;
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = d;
    acc += (outward_normal(shape, b + e)[k] - outward_normal(shape, b - e)[k]) / (2 * d);
  }
  return acc;
}

bool interior_block(const DomainMesh& mesh, const Vec3& x, CellStencil& st) {
  const Grid& g = mesh.grid();
  const Vec3 t = (x - g.origin) / g.h;
  int c0[3];
  std::array<std::array<double, 3>, 3> w;
  for (int d = 0; d < 3; ++d) {
    c0[d] = int(std::lround(t[d]));
    const double f = t[d] - c0[d];
    w[d] = {0.5 * f * (f - 1), 1 - f * f, 0.5 * f * (f + 1)};
  }
  int m = 0;
  for (int k = -1; k <= 1; ++k)
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i, ++m) {
        const int ii = c0[0] + i, jj = c0[1] + j, kk = c0[2] + k;
        if (!g.contains(ii, jj, kk)) return false;
        const Index idx = g.index(ii, jj, kk);
        if (!mesh.is_interior(idx)) return false;
        st.node[m] = idx;
        st.w[m] = w[0][i + 1] * w[1][j + 1] * w[2][k + 1];
      }
  return true;
}

// The first image sits at depth >= 2h, deep enough for its 3x3x3 block on
// smooth shapes; both depths grow near corners and thin features.
ImageRule make_rule(const DomainMesh& mesh, const Vec3& p, const Vec3& b, const Vec3& nu) {
  const double h = mesh.grid().h;
  ImageRule r;
  r.b = b;
  r.nu = nu;
  r.s = std::max(0.0, (p - b).dot(nu));
  r.kappa = normal_divergence(mesh.shape(), b, h);
  for (double L = 2.0 * h; L <= 8.0 * h; L += 0.25 * h) {
    if (interior_block(mesh, b - L * nu, r.image[0]) && interior_block(mesh, b - (L + h) * nu, r.image[1])) {
      r.L1 = L;
      r.L2 = L + h;
      r.coefficients();
      return r;
    }
  }
  throw Error(ErrorCode::kMeshTooCoarse, "no interior image block near a boundary point");
}

ImageRule make_node_rule(const DomainMesh& mesh, Index node) {
  const Vec3 p = mesh.grid().position(node);
  return make_rule(mesh, p, closest_point(mesh.shape(), p), outward_normal(mesh.shape(), p));
}

// Unknowns live on interior nodes only; outside 6-neighbours are ghosts
// given by their image rules.
struct Layout {
  std::vector<Index> nodes;        // slot -> node
  std::vector<std::int32_t> slot;  // node -> slot, or -1
  std::vector<Index> ghosts;       // ghost nodes
  std::vector<std::int32_t> ghost_of;  // node -> ghost index, or -1
  std::vector<ImageRule> rules;    // per ghost
};

Layout make_layout(const DomainMesh& mesh) {
  const Grid& g = mesh.grid();
  Layout L;
  L.slot.assign(g.size(), -1);
  L.ghost_of.assign(g.size(), -1);
  for (Index i : mesh.interior_nodes()) {
    L.slot[i] = std::int32_t(L.nodes.size());
    L.nodes.push_back(i);
  }
  for (Index i : mesh.interior_nodes())
    for (int d = 0; d < 3; ++d)
      for (int sg : {-1, 1}) {
        const Index m = i + sg * g.stride(d);
        if (L.slot[m] >= 0 || L.ghost_of[m] >= 0) continue;
        L.ghost_of[m] = std::int32_t(L.ghosts.size());
        L.ghosts.push_back(m);
      }
  L.rules.resize(L.ghosts.size());
  parallel_for(Index(L.ghosts.size()), [&](Index k) { L.rules[k] = make_node_rule(mesh, L.ghosts[k]); });
  return L;
}

Vec3 image_value(const CellStencil& st, const Layout& L, const Eigen::VectorXd& x) {
  Vec3 v = Vec3::Zero();
  for (size_t c = 0; c < st.node.size(); ++c) {
    const Index s = L.slot[st.node[c]];
    v += st.w[c] * Vec3(x[3 * s], x[3 * s + 1], x[3 * s + 2]);
  }
  return v;
}

double image_scalar(const CellStencil& st, const Layout& L, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (size_t c = 0; c < st.node.size(); ++c) v += st.w[c] * x[L.slot[st.node[c]]];
  return v;
}

Vec3 ghost_value(const ImageRule& r, const Layout& L, const Eigen::VectorXd& x) {
  return r.vector_map(0) * image_value(r.image[0], L, x) + r.vector_map(1) * image_value(r.image[1], L, x);
}

double normal_trace(const ImageRule& r, const Layout& L, const Eigen::VectorXd& x) {
  return r.nu.dot(r.nor_b[0] * image_value(r.image[0], L, x) + r.nor_b[1] * image_value(r.image[1], L, x));
}

// h^2 (-Laplace + 1) on interior nodes, ghosts substituted.
SpMat assemble_vector_system(const DomainMesh& mesh, const Layout& L) {
  const Grid& g = mesh.grid();
  const double h = g.h;
  const Index n = Index(L.nodes.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(n) * 24);
  for (Index s = 0; s < n; ++s) {
    const Index node = L.nodes[s];
    for (int d = 0; d < 3; ++d) trip.emplace_back(3 * s + d, 3 * s + d, 6.0 + h * h);
    for (int a = 0; a < 3; ++a)
      for (int sg : {-1, 1}) {
        const Index m = node + sg * g.stride(a);
        if (L.slot[m] >= 0) {
          for (int d = 0; d < 3; ++d) trip.emplace_back(3 * s + d, 3 * L.slot[m] + d, -1.0);
          continue;
        }
        const ImageRule& r = L.rules[L.ghost_of[m]];
        for (int im = 0; im < 2; ++im) {
          const Eigen::Matrix3d T = r.vector_map(im);
          const CellStencil& st = r.image[im];
          for (size_t c = 0; c < st.node.size(); ++c) {
            const Index q = L.slot[st.node[c]];
            for (int d = 0; d < 3; ++d)
              for (int e = 0; e < 3; ++e)
                if (T(d, e) != 0.0) trip.emplace_back(3 * s + d, 3 * q + e, -st.w[c] * T(d, e));
          }
        }
      }
  }
  SpMat A(3 * n, 3 * n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// -Laplace on interior nodes with Dirichlet data at the ghost closest points:
// the ghost value is the quadratic through zeta(b) and the two images. The
// boundary values enter through dirichlet_rhs.
SpMat assemble_scalar_system(const DomainMesh& mesh, const Layout& L) {
  const Grid& g = mesh.grid();
  const Index n = Index(L.nodes.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(n) * 10);
  for (Index s = 0; s < n; ++s) {
    const Index node = L.nodes[s];
    trip.emplace_back(s, s, 6.0);
    for (int a = 0; a < 3; ++a)
      for (int sg : {-1, 1}) {
        const Index m = node + sg * g.stride(a);
        if (L.slot[m] >= 0) {
          trip.emplace_back(s, L.slot[m], -1.0);
          continue;
        }
        const ImageRule& r = L.rules[L.ghost_of[m]];
        for (int im = 0; im < 2; ++im)
          for (size_t c = 0; c < r.image[im].node.size(); ++c)
            trip.emplace_back(s, L.slot[r.image[im].node[c]], -r.dir[1 + im] * r.image[im].w[c]);
      }
  }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::VectorXd dirichlet_rhs(const DomainMesh& mesh, const Layout& L, const std::vector<double>& zeta_b) {
  const Grid& g = mesh.grid();
  const Index n = Index(L.nodes.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Index s = 0; s < n; ++s) {
    const Index node = L.nodes[s];
    for (int a = 0; a < 3; ++a)
      for (int sg : {-1, 1}) {
        const Index m = node + sg * g.stride(a);
        if (L.slot[m] >= 0) continue;
        const int k = L.ghost_of[m];
        rhs[s] += L.rules[k].dir[0] * zeta_b[k];
      }
  }
  return rhs;
}

void setup_solver(Solver& solver, const SpMat& A, const LondonOptions& opts) {
  solver.preconditioner().setDroptol(1e-3);
  solver.preconditioner().setFillfactor(3);
  solver.setMaxIterations(opts.max_iters);
  solver.setTolerance(0.1 * opts.tol);
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSolverDiverged, "preconditioner setup failed");
}

Eigen::VectorXd solve_checked(Solver& solver, const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess,
                              const char* what) {
  Eigen::VectorXd x = solver.solveWithGuess(rhs, guess);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorCode::kSolverDiverged, std::string(what) + ": iteration cap hit or breakdown");
  return x;
}

void check_resolution(const DomainMesh& mesh) {
  const Grid& g = mesh.grid();
  const Vec3 ext = half_extent(mesh.shape());
  for (int d = 0; d < 3; ++d) {
    // Interior nodes strictly inside along the axis through the centre.
    const int across = 2 * int(std::ceil(ext[d] / g.h - 1e-12)) - 1;
    if (across < 3) throw Error(ErrorCode::kMeshTooCoarse, "fewer than 3 interior nodes across the domain");
  }
}

}  // namespace

VectorField node_curl(const VectorField& b) {
  if (b.storage != Storage::kNode) throw Error(ErrorCode::kWrongStorage, "node_curl needs a node field");
  const DomainMesh& mesh = *b.mesh;
  const Grid& g = mesh.grid();
  VectorField out(b.mesh, Storage::kNode);
  const double inv2h = 0.5 / g.h;
  for (Index i : mesh.interior_nodes()) {
    auto dcomp = [&](int comp, int axis) {
      return (b.c[comp][i + g.stride(axis)] - b.c[comp][i - g.stride(axis)]) * inv2h;
    };
    out.set(i, Vec3(dcomp(2, 1) - dcomp(1, 2), dcomp(0, 2) - dcomp(2, 0), dcomp(1, 0) - dcomp(0, 1)));
  }
  return out;
}

namespace {
void attach_lattice(MeissnerData& out, const MeshPtr& mesh, const VectorFunction& h0ex, const LondonOptions& opts) {
  out.lattice = solve_lattice_london(mesh, h0ex, opts.lattice_tol, opts.lattice_max_iters);
  out.curlB0 = out.lattice.j0;
  out.J0 = out.lattice.J0;
  out.has_lattice = true;
}
}  // namespace

MeissnerData solve_london(const MeshPtr& mesh_ptr, const VectorFunction& applied, const LondonOptions& opts) {
  if (!(opts.tol > 0)) throw Error(ErrorCode::kValidationError, "London tolerance must be positive");
  const DomainMesh& mesh = *mesh_ptr;
  check_resolution(mesh);
  const Grid& g = mesh.grid();
  const double h = g.h;

  MeissnerData out;
  out.mesh = mesh_ptr;
  const double norm2 = integrate(mesh_ptr, [&](const Vec3& p) { return applied(p).squaredNorm(); });
  out.applied_norm = std::sqrt(norm2);
  const double scale = (opts.normalize && out.applied_norm > 0) ? 1.0 / out.applied_norm : 1.0;
  const VectorFunction h0ex = [&applied, scale](const Vec3& p) -> Vec3 { return scale * applied(p); };
  out.H0ex = sample_field(mesh_ptr, Storage::kNode, h0ex);
  out.B0 = VectorField(mesh_ptr, Storage::kNode);
  out.curlB0 = VectorField(mesh_ptr, Storage::kEdge);
  if (out.applied_norm == 0.0) return out;
  if (!opts.continuum) {
    if (!opts.lattice) throw Error(ErrorCode::kValidationError, "London options request neither solve");
    attach_lattice(out, mesh_ptr, h0ex, opts);
    return out;
  }

  const Layout L = make_layout(mesh);
  const Index n = Index(L.nodes.size());

  Eigen::VectorXd base(3 * n);
  for (Index s = 0; s < n; ++s)
    for (int d = 0; d < 3; ++d) base[3 * s + d] = h * h * out.H0ex.c[d][L.nodes[s]];

  const SpMat A = assemble_vector_system(mesh, L);
  Solver solver;
  setup_solver(solver, A, opts);
  Eigen::VectorXd x = solve_checked(solver, base, Eigen::VectorXd::Zero(3 * n), "London system");
  out.iterations = int(solver.iterations());
  Eigen::VectorXd rhs = base;

  if (opts.exterior_correction) {
    // Exterior coupling: zeta = S[B0 . nu] on the boundary, harmonic inside,
    // enters the right-hand side as grad zeta.
    const Vec3 ext = half_extent(mesh.shape());
    const int nq = opts.surface_resolution > 0 ? opts.surface_resolution
                                                : std::max(8, int(std::ceil(1.6 * ext.maxCoeff() / h)));
    const detail::SurfaceQuadrature quad = detail::build_surface_quadrature(mesh.shape(), nq);
    const Index nquad = Index(quad.x.size());
    std::vector<ImageRule> qrule(nquad);
    parallel_for(nquad, [&](Index q) { qrule[q] = make_rule(mesh, quad.x[q], quad.x[q], quad.nu[q]); });
    const Index ng = Index(L.ghosts.size());
    std::vector<double> s_one(ng);
    parallel_for(ng, [&](Index k) { s_one[k] = detail::single_layer_of_one(mesh.shape(), quad, L.rules[k].b); });

    const SpMat S = assemble_scalar_system(mesh, L);
    Solver scalar;
    setup_solver(scalar, S, opts);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(n);
    std::vector<double> sigma(nquad), zeta_b(ng);
    for (int outer = 0; outer < opts.max_outer; ++outer) {
      parallel_for(nquad, [&](Index q) { sigma[q] = normal_trace(qrule[q], L, x); });
      parallel_for(ng, [&](Index k) {
        const Vec3& b = L.rules[k].b;
        const double sb = normal_trace(L.rules[k], L, x);
        double acc = sb * s_one[k];
        for (Index q = 0; q < nquad; ++q) {
          const double dist = (quad.x[q] - b).norm();
          if (dist > 1e-14) acc += (sigma[q] - sb) * quad.area[q] / (4.0 * M_PI * dist);
        }
        zeta_b[k] = acc;
      });
      zeta = solve_checked(scalar, dirichlet_rhs(mesh, L, zeta_b), zeta, "exterior potential");
      auto zeta_at = [&](Index node) {
        if (L.slot[node] >= 0) return zeta[L.slot[node]];
        const int k = L.ghost_of[node];
        const ImageRule& r = L.rules[k];
        return r.dir[0] * zeta_b[k] + r.dir[1] * image_scalar(r.image[0], L, zeta) +
               r.dir[2] * image_scalar(r.image[1], L, zeta);
      };
      rhs = base;
      for (Index s = 0; s < n; ++s) {
        const Index node = L.nodes[s];
        for (int d = 0; d < 3; ++d)
          rhs[3 * s + d] += 0.5 * h * (zeta_at(node + g.stride(d)) - zeta_at(node - g.stride(d)));
      }
      const Eigen::VectorXd prev = x;
      x = solve_checked(solver, rhs, x, "London system");
      out.iterations += int(solver.iterations());
      out.outer_iterations = outer + 1;
      out.outer_change = (x - prev).norm() / std::max(x.norm(), 1e-300);
      if (out.outer_change < opts.tol) break;
    }
  }
  out.residual_norm = (A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);

  for (Index s = 0; s < n; ++s)
    for (int d = 0; d < 3; ++d) out.B0.c[d][L.nodes[s]] = x[3 * s + d];
  // Outside nodes within 2h of the boundary take their image-rule values, so
  // interpolation anywhere in the closure of Omega sees consistent data.
  {
    std::vector<Index> outside;
    for (Index i = 0; i < g.size(); ++i)
      if (!mesh.is_interior(i) && mesh.node_sd(i) < 2 * h) outside.push_back(i);
    parallel_for(Index(outside.size()), [&](Index k) {
      const Index i = outside[k];
      const int gk = L.ghost_of[i];
      const ImageRule r = gk >= 0 ? L.rules[gk] : make_node_rule(mesh, i);
      out.B0.set(i, ghost_value(r, L, x));
    });
    // Trilinear trace at the boundary points: measures how well the
    // extended field honours B x nu = 0 between nodes.
    for (const ImageRule& r : L.rules)
      out.tangential_max = std::max(out.tangential_max, interpolate(out.B0, r.b).cross(r.nu).norm());
  }
  double div2 = 0.0, b2 = 0.0;
  for (Index i : mesh.interior_nodes()) {
    double dv = 0.0;
    for (int d = 0; d < 3; ++d) dv += (out.B0.c[d][i + g.stride(d)] - out.B0.c[d][i - g.stride(d)]) / (2 * h);
    out.div_max = std::max(out.div_max, std::abs(dv));
    div2 += mesh.node_weight(i) * dv * dv;
    b2 += mesh.node_weight(i) * out.B0.at(i).squaredNorm();
  }
  out.div_l2 = b2 > 0 ? std::sqrt(div2 / b2) : 0.0;
  out.J0_full_space = 0.5 * inner(out.H0ex, out.B0);
  out.has_continuum = true;

  if (opts.lattice) {
    attach_lattice(out, mesh_ptr, h0ex, opts);
  } else {
    out.J0 = out.J0_full_space;
  }
  return out;
}

MeissnerData solve_london(const MeshPtr& mesh, const VectorField& applied, double tol) {
  if (applied.storage != Storage::kNode) throw Error(ErrorCode::kWrongStorage, "applied field must be node-stored");
  require_same_mesh(mesh, applied.mesh);
  LondonOptions opts;
  opts.tol = tol;
  return solve_london(mesh, [&applied](const Vec3& p) { return interpolate(applied, p); }, opts);
}

}  // namespace glmeissner
