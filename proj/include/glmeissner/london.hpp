#pragma once

#include "glmeissner/curve.hpp"
#include "glmeissner/fields.hpp"

namespace glmeissner {

struct LondonOptions {
  double tol = 1e-8;          // relative residual of the B0 system
  int max_iters = 100000;     // Krylov iteration cap
  // Adds the gradient of the single-layer potential of B0.nu to the right-hand
  // side, i.e. couples the interior problem to the exact full-space exterior.
  // Without it the solve reproduces the interior equation alone, which is off
  // by a constant factor on the ball (see README, "London problem").
  bool exterior_correction = true;
  int max_outer = 60;
  int surface_resolution = 0;  // patches per cube-sphere face edge, 0 = auto
  bool continuum = true;       // solve for the node-stored B0
  bool lattice = true;         // also run the lattice London minimization
  double lattice_tol = 1e-11;
  int lattice_max_iters = 20000;
  bool normalize = true;       // scale the applied field to unit L2 norm in Omega
};

// Lattice Meissner state on the padded box: A on all box edges, a phase on
// Omega nodes, minimizing
//   1/2 sum_e w_e h^3 (A_e - (grad phi)_e)^2 + 1/2 sum_f h^3 (curl A - H)_f^2.
struct LatticeMeissner {
  VectorField A;        // Omega-gauge potential A - grad(phi), every box edge
  VectorField j0;       // A - grad(phi) on edges with w_e > 0 (lattice curl B0)
  VectorField H_faces;  // applied flux per face
  double J0 = 0.0;
  double kinetic = 0.0;
  double field = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct MeissnerData {
  MeshPtr mesh;
  VectorField B0;        // node-stored; interior, ghost and extension nodes
  VectorField curlB0;    // edge-stored lattice current j0
  double J0 = 0.0;       // lattice value on the padded box
  double J0_full_space = 0.0;  // 1/2 int_Omega H0ex . B0
  VectorField H0ex;      // node-stored normalized applied field
  double applied_norm = 0.0;  // ||H||_{L2(Omega)} before normalization
  double residual_norm = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  double outer_change = 0.0;
  double div_max = 0.0;         // max |div B0| over interior nodes
  double div_l2 = 0.0;          // ||div B0||_{L2} / ||B0||_{L2}
  double tangential_max = 0.0;  // max |B0 x nu| at ghost closest points
  LatticeMeissner lattice;
  bool has_continuum = false;   // B0 holds a solution
  bool has_lattice = false;
};

MeissnerData solve_london(const MeshPtr& mesh, const VectorFunction& applied, const LondonOptions& opts = {});
// Node-stored applied field (trilinear interpolation between nodes).
MeissnerData solve_london(const MeshPtr& mesh, const VectorField& applied, double tol);

LatticeMeissner solve_lattice_london(const MeshPtr& mesh, const VectorFunction& h0ex, double tol,
                                     int max_iters);

// Nodewise curl of the node-stored B0 by central differences (interior nodes).
VectorField node_curl(const VectorField& b);

// Closed-form Meissner data for the ball with applied field z inside.
Vec3 analytic_ball_B0(double R, const Vec3& p);
// Same formula without the |p| <= R check (smooth continuation).
Vec3 ball_b0_formula(double R, const Vec3& p);
// curl of the closed-form field, Cartesian.
Vec3 ball_curl_b0(double R, const Vec3& p);
double ball_norm_star_exact(double R);
double curl_b0_y_component(double R, double r, double phi);
double hc1_leading(double eps, double norm_star);
// J = 1/2 int_B H0ex . B0 for H0ex = z (unnormalized), closed form.
double ball_J0_exact(double R);
// Constant kappa(R) with (-Laplace + 1) B0 = kappa z for the closed form.
double ball_kappa(double R);

}  // namespace glmeissner
