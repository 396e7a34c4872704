#pragma once

#include <cstdint>
#include <vector>

#include "glmeissner/curve.hpp"
#include "glmeissner/fields.hpp"

namespace glmeissner {

// Directed graph whose cycles discretize the curve class X. Edge e carries
// w_e = int_e B0 . dl (midpoint rule) and its Euclidean length. Node `hub`
// (if >= 0) is the virtual boundary vertex: a cycle through it is an arc
// between two boundary vertices.
struct RatioGraph {
  std::vector<Vec3> pos;             // boundary vertices sit on the boundary
  std::vector<std::uint8_t> on_boundary;
  std::int32_t hub = -1;
  std::vector<std::int64_t> offset;  // CSR, size nodes + 1
  std::vector<std::int32_t> target;
  std::vector<double> w, len;

  std::int32_t node_count() const { return std::int32_t(offset.empty() ? 0 : offset.size() - 1); }
  std::int64_t edge_count() const { return std::int64_t(target.size()); }
};

// Builds a RatioGraph from an undirected edge list; each entry (p, q, w, len)
// yields p->q with w and q->p with -w.
struct UndirectedEdge {
  std::int32_t p, q;
  double w, len;
};
RatioGraph make_ratio_graph(std::vector<Vec3> pos, std::vector<std::uint8_t> on_boundary, std::int32_t hub,
                            const std::vector<UndirectedEdge>& edges);

// Vertices: interior nodes at their grid positions and boundary nodes
// projected onto the boundary, plus the hub. Edges: the 26-neighbourhood
// between vertices with at least one interior end, and hub links.
RatioGraph build_ratio_graph(const MeshPtr& mesh, const VectorFunction& B0);
RatioGraph build_ratio_graph(const MeshPtr& mesh, const VectorField& B0);

struct CycleResult {
  double value = 0.0;                // best ratio found (0 if none positive)
  std::vector<std::int32_t> cycle;   // simple cycle in traversal order
  double integral = 0.0, length = 0.0;
  double upper = 0.0;                // no cycle has ratio above this
  int rounds = 0;                    // positive-cycle searches performed
  bool certified = false;            // final search at value + tol found nothing
};

// Maximum of sum(w)/sum(len) over simple cycles, to within tol.
CycleResult max_ratio_cycle(const RatioGraph& g, double tol);

struct NormStarResult {
  double value = 0.0;        // line_integral / length on the extracted curve
  double graph_value = 0.0;  // value of the cycle search
  double integral = 0.0, length = 0.0;
  CurveCurrent curve;
  CycleResult search;
};

CurveCurrent cycle_to_curve(const RatioGraph& g, const std::vector<std::int32_t>& cycle);

NormStarResult norm_star(const MeshPtr& mesh, const VectorField& B0, double tol = 1e-4);
NormStarResult norm_star(const MeshPtr& mesh, const VectorFunction& B0, double tol = 1e-4);

// Meridian half-disc {(rho, z): rho >= 0, rho^2 + z^2 < R^2} with the planar
// components (B_rho, B_z) of the closed-form ball field; `resolution` cells
// across the radius, 16-neighbour moves. Arcs end on the circular boundary.
struct HalfDiscResult {
  double value = 0.0;
  std::vector<Eigen::Vector2d> curve;  // (rho, z) vertices
  bool closed = false;
  CycleResult search;
};
HalfDiscResult norm_star_halfdisc_full(double R, int resolution, double tol = 1e-5);
double norm_star_halfdisc(double R, int resolution = 128);

}  // namespace glmeissner
