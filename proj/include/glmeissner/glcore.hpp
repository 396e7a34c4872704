#pragma once

#include <memory>
#include <vector>

#include "glmeissner/curve.hpp"
#include "glmeissner/fields.hpp"
#include "glmeissner/london.hpp"

namespace glmeissner {

// A configuration (u', A') relative to the Meissner background in the
// Omega-gauge: the full state is (u', h_ex A_M + A') with A_M the lattice
// Meissner potential. u' lives on nodes, A' on every box edge.
struct GLState {
  MeshPtr mesh;
  ComplexField u;
  VectorField A;
  double eps = 0.05;
  double hex = 0.0;
  std::shared_ptr<const MeissnerData> meissner;

  // Throws InvalidEpsilon / ValidationError / MeshMismatch.
  void validate() const;
};

// u' = 1, A' = 0.
GLState meissner_state(const MeshPtr& mesh, std::shared_ptr<const MeissnerData> meissner, double eps, double hex);

struct EnergyReport {
  double kinetic = 0.0;
  double potential = 0.0;
  double field_inside = 0.0;
  double field_outside = 0.0;
  double free_energy = 0.0;     // kinetic + potential + field_inside
  double meissner_term = 0.0;   // h_ex^2 J0
  double vorticity_term = 0.0;  // -h_ex sum_e w_e h^3 (j'_e + A'_e) j0_e
  double R0 = 0.0;              // h_ex^2/2 sum_e w_e h^3 (avg|u'|^2 - 1) j0_e^2
  double total = 0.0;           // the five terms above, summed in that order
};

// Node/edge sets that carry the Omega integrals.
bool node_active(const DomainMesh& mesh, Index i);

double free_energy(const GLState& s);
// Requires Meissner data (MissingMeissnerData otherwise).
EnergyReport gl_total_energy(const GLState& s);
// Direct lattice GL energy of the full configuration (u', h_ex A_M + A'),
// with the applied flux h_ex H on every box face; the reference side of the
// splitting identity.
double gl_direct_energy(const GLState& s);

// Plaquette windings of (u, A); face slots as in Storage::kFace. Faces with
// an edge outside Omega are marked invalid and hold 0.
struct VorticityField {
  MeshPtr mesh;
  std::array<std::vector<double>, 3> winding;
  std::array<std::vector<std::uint8_t>, 3> valid;

  // Largest |sum of outward windings| over cubes whose six faces are valid.
  double closedness_defect() const;
  // Sum over valid faces of |winding| / 2 pi.
  double total_turns() const;
  // Faces with |winding| > pi.
  std::vector<std::pair<int, Index>> vortex_faces() const;
  bool vortexless() const { return vortex_faces().empty(); }
};

VorticityField vorticity(const MeshPtr& mesh, const ComplexField& u, const VectorField& A);
VorticityField vorticity(const GLState& s);

// j_e = Im(conj(u_p) u_q e^{-i h A_e}) / h on edges with w_e > 0, else 0.
VectorField supercurrent(const MeshPtr& mesh, const ComplexField& u, const VectorField& A);
VectorField supercurrent(const GLState& s);

// Discrete Hodge decomposition A = curl B_A + grad phi_A on the subcomplex of
// Omega edges (w_e > 0), faces and cells whose boundaries lie in it. B_A is
// face-stored, supported on Omega faces (vanishing tangential trace), and
// divergence free on Omega cells; phi_A has zero mean over Omega nodes.
struct HodgeResult {
  VectorField B;      // face-stored
  ScalarField phi;    // node-stored
  VectorField curl_part, grad_part;  // edge-stored, on Omega edges
  double residual = 0.0;        // ||A - curl B - grad phi|| / ||A|| on Omega edges
  double orthogonality = 0.0;   // |<curl B, grad phi>| / (||curl B|| ||grad phi||)
  double phi_mean = 0.0;
  double div_max = 0.0;         // max |div B| over Omega cells
  int iterations = 0;
};
HodgeResult hodge_decompose(const VectorField& A, double tol = 1e-11);

// Twelve divergence-free fields vanishing on the boundary: curl(F^2 p e_c)
// with F the shape's defining function, p in {1, x, y, z}, c in {x, y, z}.
std::vector<VectorFunction> vorticity_test_fields(const Shape& shape);

struct VorticityBoundReport {
  bool applicable = false;
  double min_abs_u = 0.0;
  double free_energy = 0.0;
  std::vector<double> pairings;  // <mu, phi_k>
  std::vector<double> lip_norms; // ||phi_k||_{C^{0,1}} on the grid
  std::vector<double> ratios;    // |pairing| / (lip * eps * F)
  double max_ratio = 0.0;
};
// Throws VortexPresent if min|u| over Omega nodes is below c.
VorticityBoundReport check_vorticity_bound(const GLState& s, const std::vector<VectorFunction>& test_fields,
                                           double c = 0.5);

// Gauge transform (u e^{i chi}, A + grad chi) with chi node-stored.
GLState gauge_transform(const GLState& s, const ScalarField& chi);
// chi solving the weighted Neumann problem div(w (A + grad chi)) = 0 on
// Omega nodes, zero mean; applying it puts A' in the discrete Coulomb gauge.
ScalarField coulomb_gauge(const GLState& s, double tol = 1e-10);
// Weighted discrete divergence of A' on Omega nodes, max abs.
double coulomb_defect(const GLState& s);

// Right side of the Cauchy-Schwarz chain for R0:
//   h_ex^2 eps sqrt(E_edge) sqrt(sum_e w_e h^3 j0_e^4),
// with E_edge the edge-averaged potential sum_e w_e h^3 (avg|u|^2 - 1)^2 / (4 eps^2).
double r0_bound(const GLState& s);

// min |u| over Omega nodes (node weight > 0).
double min_abs_u(const GLState& s);

}  // namespace glmeissner
