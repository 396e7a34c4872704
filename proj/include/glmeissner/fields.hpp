#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "glmeissner/mesh.hpp"

namespace glmeissner {

using Complex = std::complex<double>;

// Where a field's slots live. Edge component d at node n is the edge
// n -> n + e_d; face component d at node n is the face normal to e_d whose
// lowest corner is n; cell n is the cube whose lowest corner is n.
enum class Storage { kNode, kEdge, kFace, kCell };

const char* storage_name(Storage s);

struct ScalarField {
  MeshPtr mesh;
  Storage storage = Storage::kNode;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(MeshPtr m, Storage s = Storage::kNode, double fill = 0.0);
  double& operator[](Index i) { return values[i]; }
  double operator[](Index i) const { return values[i]; }
};

struct VectorField {
  MeshPtr mesh;
  Storage storage = Storage::kEdge;
  std::array<std::vector<double>, 3> c;

  VectorField() = default;
  VectorField(MeshPtr m, Storage s, double fill = 0.0);
  double& operator()(int d, Index i) { return c[d][i]; }
  double operator()(int d, Index i) const { return c[d][i]; }
  Vec3 at(Index i) const { return Vec3(c[0][i], c[1][i], c[2][i]); }
  void set(Index i, const Vec3& v) {
    c[0][i] = v[0];
    c[1][i] = v[1];
    c[2][i] = v[2];
  }
  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  void axpy(double a, const VectorField& x);
  bool all_finite() const;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

struct ComplexField {
  MeshPtr mesh;
  std::vector<Complex> values;

  ComplexField() = default;
  ComplexField(MeshPtr m, Complex fill = Complex(0.0, 0.0));
  Complex& operator[](Index i) { return values[i]; }
  const Complex& operator[](Index i) const { return values[i]; }
};

// Per-edge complex data, e.g. the covariant link difference.
struct EdgeComplexField {
  MeshPtr mesh;
  std::array<std::vector<Complex>, 3> c;
};

void require_same_mesh(const MeshPtr& a, const MeshPtr& b);

// Discrete exterior calculus on the staggered lattice. Slots that would need
// nodes outside the grid are left at zero.
VectorField gradient(const ScalarField& s);        // node -> edge
VectorField curl(const VectorField& v);            // edge -> face, face -> edge (dual)
ScalarField divergence(const VectorField& v);      // edge -> node (dual), face -> cell
// Exact adjoint of curl(edge -> face) w.r.t. the plain slot inner product:
// the dual curl with faces outside the grid treated as zero.
VectorField curl_transpose(const VectorField& f);

EdgeComplexField covariant_gradient(const ComplexField& u, const VectorField& a);

// Sampling analytic data onto slots: edge slots take the tangential
// component at the edge midpoint, face slots the normal component at the
// face center.
ScalarField sample_scalar(const MeshPtr& mesh, const std::function<double(const Vec3&)>& f);
VectorField sample_field(const MeshPtr& mesh, Storage storage,
                         const std::function<Vec3(const Vec3&)>& f);
ComplexField sample_complex(const MeshPtr& mesh, const std::function<Complex(const Vec3&)>& f);

// Position of a slot.
Vec3 slot_position(const Grid& g, Storage s, int d, Index i);
bool slot_exists(const Grid& g, Storage s, int d, Index i);

// Staggered trilinear interpolation at an arbitrary point of the grid box.
Vec3 interpolate(const VectorField& v, const Vec3& p);
double interpolate(const ScalarField& s, const Vec3& p);
// Node-centred copy (averages of adjacent slots).
VectorField to_nodes(const VectorField& v);

// Omega quadrature with analytic volume fractions (midpoint rule, h^3 cells).
double integrate(const ScalarField& s);
double integrate(const MeshPtr& mesh, const std::function<double(const Vec3&)>& f);
double inner(const VectorField& a, const VectorField& b);  // over Omega
double norm_l2(const VectorField& v);                      // over Omega
// Plain slot sum over the whole box times h^3 (the truncated exterior region).
double inner_box(const VectorField& a, const VectorField& b);

// Largest |value| over slots whose cell meets Omega (weight > 0).
double max_abs_in_omega(const ScalarField& s);

}  // namespace glmeissner
