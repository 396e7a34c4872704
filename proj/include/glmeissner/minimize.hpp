#pragma once

#include <string>
#include <vector>

#include "glmeissner/glcore.hpp"
#include "glmeissner/normstar.hpp"

namespace glmeissner {

enum class StepRule { kFixed, kBacktracking };
enum class Method { kGradientDescent, kLBFGS };

struct MinimizeOptions {
  int max_iters = 2000;
  double grad_tol = 1e-6;       // on ||gradient|| / h^{3/2}, an L2 density norm
  StepRule step_rule = StepRule::kBacktracking;
  double eta = 1e-2;            // fixed step, or first trial step of backtracking
  double c1 = 1e-4;
  double shrink = 0.5;
  double momentum = 0.0;        // heavy-ball coefficient, gradient descent only
  Method method = Method::kGradientDescent;
  int lbfgs_memory = 5;
  int gauge_fix_every = 50;     // 0 disables the Coulomb projection
  bool record_history = false;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  bool gauge_fixed = false;
};

struct MinimizeResult {
  GLState state;
  std::vector<TraceRow> trace;   // every iteration when record_history, else first and last
  int iterations = 0;
  int evaluations = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  bool monotone = true;
};

struct EnergyGradient {
  double energy = 0.0;
  ComplexField du;  // dE/dRe u + i dE/dIm u
  VectorField dA;
};

// Gradient of gl_total_energy(s).total with respect to (u', A'). Zero on
// nodes outside the Omega complex.
EnergyGradient energy_gradient(const GLState& s);
double gradient_norm(const GLState& s, const EnergyGradient& g);

MinimizeResult minimize(const GLState& s0, const MinimizeOptions& opts);

// Order parameter with one vortex line along the curve: the phase is half
// the solid angle subtended by the curve closed outside the domain, the
// modulus min(1, dist / core_radius).
ComplexField seed_vortex(const MeshPtr& mesh, const CurveCurrent& curve, double core_radius);

// Adds amplitude * N(0, 1) to Re u' and Im u' on Omega nodes and to A' on
// Omega edges; reproducible for a given seed and build.
GLState perturbed_state(const GLState& s, double amplitude, std::uint64_t seed);

// Norm-star extremal of the Meissner field on a mesh of spacing
// `curve_spacing` (0 = max(h, diameter / 16)); uses the node-stored B0 when
// present, otherwise a continuum London solve on that mesh.
NormStarResult seeding_curve(const MeshPtr& mesh, const MeissnerData& meissner, double curve_spacing,
                             double tol = 1e-4);

// Shifts a curve by a fixed fraction of the spacing so that no node lies on
// it; endpoints on the boundary are projected back onto it.
CurveCurrent offset_curve(const DomainMesh& mesh, const CurveCurrent& curve);

// Vorticity within `cells` grid cells of the curve over the total (1 if the
// state has no vorticity).
double vorticity_fraction_near(const VorticityField& v, const CurveCurrent& curve, double cells);
// Sum over faces of |winding| / 2 pi times h: a length proxy of the vortex set.
double vortex_mass(const VorticityField& v);

struct BranchOutcome {
  double total = 0.0;
  double free_energy = 0.0;
  double min_abs_u = 0.0;
  double vortex_mass = 0.0;
  bool vortexless = false;  // every winding zero and min|u| >= 0.5
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

struct SweepRow {
  double hex = 0.0;
  double meissner_energy = 0.0;  // h_ex^2 J0
  BranchOutcome meissner, seeded;
  // Winner (lower total) and its properties.
  bool seeded_wins = false;
  double total_energy = 0.0;
  double vortex_mass = 0.0;
  double min_abs_u = 0.0;
  bool vortexless = false;
};

struct SweepOptions {
  MinimizeOptions minimize;
  CurveCurrent curve;          // seeding curve; the norm-star extremal when empty
  double curve_spacing = 0.0;  // mesh for the extremal search, 0 = max(h, diameter / 16)
  double core_radius = 0.0;    // 0 = max(eps, 2h)
};

struct SweepResult {
  std::vector<SweepRow> rows;   // ascending hex
  CurveCurrent curve;           // as seeded (after the node offset)
  double norm_star = 0.0;       // of the seeding curve for the normalized B0
  double hc1_leading = 0.0;     // |log eps| / (2 norm_star)
  bool crossed = false;
  double hc1_numeric = 0.0;     // zero of the energy gap, linear interpolation
  double bracket_low = 0.0, bracket_high = 0.0;
  bool monotone = true;         // seeded branch keeps winning after the first win
};

// Requires node-stored B0 when the extremal curve has to be computed.
SweepResult hc1_sweep(const MeshPtr& mesh, std::shared_ptr<const MeissnerData> meissner, double eps,
                      const std::vector<double>& hex_list, const SweepOptions& opts);

// Midpoint convexity defect of the total energy between two vortexless
// states, each moved to the gauge where u is real and positive.
double convexity_diagnostic(const GLState& s1, const GLState& s2, double c = 0.5);
// The real gauge used above.
GLState real_gauge(const GLState& s);

}  // namespace glmeissner
