#include "glmeissner/normstar.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "glmeissner/error.hpp"
#include "glmeissner/london.hpp"

namespace glmeissner {

RatioGraph make_ratio_graph(std::vector<Vec3> pos, std::vector<std::uint8_t> on_boundary, std::int32_t hub,
                            const std::vector<UndirectedEdge>& edges) {
  RatioGraph g;
  const std::int32_t n = std::int32_t(pos.size());
  g.pos = std::move(pos);
  g.on_boundary = std::move(on_boundary);
  g.on_boundary.resize(n, 0);
  g.hub = hub;
  g.offset.assign(size_t(n) + 1, 0);
  for (const auto& e : edges) {
    ++g.offset[e.p + 1];
    ++g.offset[e.q + 1];
  }
  for (std::int32_t i = 0; i < n; ++i) g.offset[i + 1] += g.offset[i];
  g.target.resize(2 * edges.size());
  g.w.resize(2 * edges.size());
  g.len.resize(2 * edges.size());
  std::vector<std::int64_t> fill(g.offset.begin(), g.offset.end() - 1);
  auto put = [&](std::int32_t a, std::int32_t b, double w, double len) {
    const std::int64_t k = fill[a]++;
    g.target[k] = b;
    g.w[k] = w;
    g.len[k] = len;
  };
  for (const auto& e : edges) {
    put(e.p, e.q, e.w, e.len);
    put(e.q, e.p, -e.w, e.len);
  }
  return g;
}

RatioGraph build_ratio_graph(const MeshPtr& mesh_ptr, const VectorFunction& B0) {
  const DomainMesh& mesh = *mesh_ptr;
  const Grid& grid = mesh.grid();
  if (mesh.interior_nodes().empty()) throw Error(ErrorCode::kEmptyDomain, "no interior node");

  std::vector<std::int32_t> vid(grid.size(), -1);
  std::vector<Vec3> pos;
  std::vector<std::uint8_t> on_boundary;
  for (Index i = 0; i < grid.size(); ++i) {
    const NodeClass c = mesh.node_class(i);
    if (c == NodeClass::kOutside) continue;
    vid[i] = std::int32_t(pos.size());
    const Vec3 p = grid.position(i);
    if (c == NodeClass::kInterior) {
      pos.push_back(p);
      on_boundary.push_back(0);
    } else {
      pos.push_back(closest_point(mesh.shape(), p));
      on_boundary.push_back(1);
    }
  }
  const std::int32_t hub = std::int32_t(pos.size());
  pos.push_back(Vec3::Zero());
  on_boundary.push_back(0);

  // Each undirected pair once: offsets with positive lexicographic sign.
  std::vector<std::array<int, 3>> offs;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int key = dz * 9 + dy * 3 + dx;
        if (key > 0) offs.push_back({dx, dy, dz});
      }
  std::vector<UndirectedEdge> edges;
  edges.reserve(size_t(13) * pos.size());
  for (Index i = 0; i < grid.size(); ++i) {
    if (vid[i] < 0) continue;
    const auto c = grid.ijk(i);
    for (const auto& o : offs) {
      const int a = c[0] + o[0], b = c[1] + o[1], d = c[2] + o[2];
      if (!grid.contains(a, b, d)) continue;
      const Index j = grid.index(a, b, d);
      if (vid[j] < 0) continue;
      if (!mesh.is_interior(i) && !mesh.is_interior(j)) continue;
      const Vec3& p = pos[vid[i]];
      const Vec3& q = pos[vid[j]];
      const double len = (q - p).norm();
      if (len <= 1e-9 * grid.h) continue;  // node on the boundary and its projected neighbour
      edges.push_back({vid[i], vid[j], B0(0.5 * (p + q)).dot(q - p), len});
    }
  }
  for (std::int32_t v = 0; v < hub; ++v)
    if (on_boundary[v]) edges.push_back({hub, v, 0.0, 0.0});
  return make_ratio_graph(std::move(pos), std::move(on_boundary), hub, edges);
}

RatioGraph build_ratio_graph(const MeshPtr& mesh, const VectorField& B0) {
  require_same_mesh(mesh, B0.mesh);
  return build_ratio_graph(mesh, [&B0](const Vec3& p) { return interpolate(B0, p); });
}

namespace {

// Looks for a cycle with sum(w - lambda len) > 0 by label-correcting
// longest paths from a virtual source joined to every vertex. A cycle in the
// predecessor graph is always positive; it is searched for every n
// relaxations. Returns an empty vector when the labels settle.
std::vector<std::int32_t> positive_cycle(const RatioGraph& g, double lambda) {
  const std::int32_t n = g.node_count();
  std::vector<double> dist(n, 0.0);
  std::vector<std::int32_t> pred(n, -1);
  std::vector<std::uint8_t> queued(n, 1);
  std::deque<std::int32_t> queue;
  for (std::int32_t v = 0; v < n; ++v) queue.push_back(v);
  std::vector<std::int32_t> mark(n, -1);

  auto find_cycle = [&]() -> std::vector<std::int32_t> {
    std::fill(mark.begin(), mark.end(), -1);
    for (std::int32_t s = 0; s < n; ++s) {
      if (mark[s] != -1) continue;
      std::int32_t v = s;
      while (v != -1 && mark[v] == -1) {
        mark[v] = s;
        v = pred[v];
      }
      if (v == -1 || mark[v] != s) continue;
      // v lies on a cycle; walking pred lists it backwards.
      std::vector<std::int32_t> cyc{v};
      for (std::int32_t u = pred[v]; u != v; u = pred[u]) cyc.push_back(u);
      std::reverse(cyc.begin(), cyc.end());
      return cyc;
    }
    return {};
  };

  std::int64_t relaxations = 0;
  while (!queue.empty()) {
    const std::int32_t u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    const double du = dist[u];
    for (std::int64_t k = g.offset[u]; k < g.offset[u + 1]; ++k) {
      const std::int32_t v = g.target[k];
      const double cand = du + g.w[k] - lambda * g.len[k];
      if (cand > dist[v] + 1e-13 * (1.0 + std::abs(dist[v]))) {
        dist[v] = cand;
        pred[v] = u;
        if (!queued[v]) {
          queued[v] = 1;
          queue.push_back(v);
        }
        if (++relaxations % n == 0) {
          auto cyc = find_cycle();
          if (!cyc.empty()) return cyc;
        }
      }
    }
  }
  return find_cycle();
}

struct CycleStats {
  double integral = 0.0, length = 0.0;
};

CycleStats cycle_stats(const RatioGraph& g, const std::vector<std::int32_t>& cyc) {
  CycleStats s;
  for (size_t k = 0; k < cyc.size(); ++k) {
    const std::int32_t a = cyc[k], b = cyc[(k + 1) % cyc.size()];
    for (std::int64_t e = g.offset[a]; e < g.offset[a + 1]; ++e)
      if (g.target[e] == b) {
        s.integral += g.w[e];
        s.length += g.len[e];
        break;
      }
  }
  return s;
}

// Rotation starting at the smallest vertex id, for reproducible output.
void canonical_rotation(std::vector<std::int32_t>& cyc) {
  if (cyc.empty()) return;
  std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
}

}  // namespace

CycleResult max_ratio_cycle(const RatioGraph& g, double tol) {
  if (!(tol > 0)) throw Error(ErrorCode::kValidationError, "tolerance must be positive");
  if (g.node_count() == 0) throw Error(ErrorCode::kEmptyDomain, "empty graph");
  CycleResult out;
  double hi = 0.0;
  for (std::int64_t k = 0; k < g.edge_count(); ++k)
    if (g.len[k] > 0) hi = std::max(hi, g.w[k] / g.len[k]);

  // Parametric search: each positive cycle found at lambda lifts the lower
  // bound to its own ratio (a Newton step); the next probe sits tol/2 above.
  double lambda = 0.0;
  for (;;) {
    auto cyc = positive_cycle(g, lambda);
    ++out.rounds;
    if (cyc.empty()) break;
    const CycleStats st = cycle_stats(g, cyc);
    if (!(st.length > 0)) break;
    const double ratio = st.integral / st.length;
    if (out.cycle.empty() || ratio > out.value ||
        (ratio == out.value && st.length < out.length)) {
      out.value = ratio;
      out.cycle = std::move(cyc);
      out.integral = st.integral;
      out.length = st.length;
    }
    if (out.value + 0.5 * tol >= hi) break;
    lambda = std::max(lambda, out.value) + 0.5 * tol;
  }
  if (out.cycle.empty()) {
    out.value = 0.0;
    out.upper = 0.0;
    out.certified = true;
    return out;
  }
  // Certificate at value + tol.
  out.certified = positive_cycle(g, out.value + tol).empty();
  ++out.rounds;
  out.upper = out.certified ? out.value + tol : hi;
  canonical_rotation(out.cycle);
  return out;
}

CurveCurrent cycle_to_curve(const RatioGraph& g, const std::vector<std::int32_t>& cycle) {
  CurveCurrent c;
  auto at_hub = std::find(cycle.begin(), cycle.end(), g.hub);
  if (g.hub >= 0 && at_hub != cycle.end()) {
    std::vector<std::int32_t> rot(cycle.begin(), cycle.end());
    std::rotate(rot.begin(), rot.begin() + (at_hub - cycle.begin()), rot.end());
    for (size_t k = 1; k < rot.size(); ++k) c.vertices.push_back(g.pos[rot[k]]);
    c.closed = false;
    c.endpoints_on_boundary = true;
  } else {
    for (std::int32_t v : cycle) c.vertices.push_back(g.pos[v]);
    c.closed = true;
  }
  return c;
}

namespace {

NormStarResult norm_star_impl(const MeshPtr& mesh, const VectorFunction& B0, double tol) {
  const RatioGraph g = build_ratio_graph(mesh, B0);
  NormStarResult out;
  out.search = max_ratio_cycle(g, tol);
  out.graph_value = out.search.value;
  if (out.search.cycle.empty()) return out;
  out.curve = cycle_to_curve(g, out.search.cycle);
  out.curve.validate(*mesh);
  out.integral = line_integral(B0, out.curve);
  out.length = out.curve.length();
  out.value = out.integral / out.length;
  return out;
}

}  // namespace

NormStarResult norm_star(const MeshPtr& mesh, const VectorField& B0, double tol) {
  require_same_mesh(mesh, B0.mesh);
  return norm_star_impl(mesh, [&B0](const Vec3& p) { return interpolate(B0, p); }, tol);
}

NormStarResult norm_star(const MeshPtr& mesh, const VectorFunction& B0, double tol) {
  return norm_star_impl(mesh, B0, tol);
}

HalfDiscResult norm_star_halfdisc_full(double R, int resolution, double tol) {
  if (!(R > 0)) throw Error(ErrorCode::kNonPositiveRadius, "radius must be positive");
  if (resolution < 4) throw Error(ErrorCode::kValidationError, "half-disc resolution must be at least 4");
  const double h = R / resolution;
  // Nodes (i h, j h), i in [0, resolution + 1], j in [-(resolution+1), resolution+1].
  const int ni = resolution + 2, nj = 2 * resolution + 3, joff = resolution + 1;
  auto inside = [&](int i, int j) { return std::hypot(i * h, (j - joff) * h) < R * (1 - 1e-12); };
  std::vector<std::int32_t> vid(size_t(ni) * nj, -1);
  auto id = [&](int i, int j) -> std::int32_t& { return vid[size_t(j) * ni + i]; };
  std::vector<Vec3> pos;  // (rho, z, 0)
  std::vector<std::uint8_t> on_boundary;
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < ni; ++i) {
      const double rho = i * h, z = (j - joff) * h;
      if (inside(i, j)) {
        id(i, j) = std::int32_t(pos.size());
        pos.emplace_back(rho, z, 0.0);
        on_boundary.push_back(0);
        continue;
      }
      bool near = false;
      for (int dj = -1; dj <= 1 && !near; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int a = i + di, b = j + dj;
          if (a >= 0 && a < ni && b >= 0 && b < nj && inside(a, b)) near = true;
        }
      if (!near) continue;
      id(i, j) = std::int32_t(pos.size());
      const double r = std::hypot(rho, z);
      pos.emplace_back(R * rho / r, R * z / r, 0.0);
      on_boundary.push_back(1);
    }
  const std::int32_t hub = std::int32_t(pos.size());
  pos.push_back(Vec3::Zero());
  on_boundary.push_back(0);

  // Planar components of the closed-form field in the meridian plane y = 0.
  auto field = [&](const Vec3& q) {
    const Vec3 b = ball_b0_formula(R, Vec3(q[0], 0.0, q[1]));
    return Vec3(b[0], b[2], 0.0);
  };
  // 16-neighbour moves: (1,0),(0,1),(1,1),(1,-1),(2,1),(1,2),(2,-1),(1,-2) and
  // their opposites, each undirected pair listed once.
  const int moves[8][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}};
  std::vector<UndirectedEdge> edges;
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < ni; ++i) {
      const std::int32_t a = id(i, j);
      if (a < 0) continue;
      for (const auto& m : moves) {
        const int i2 = i + m[0], j2 = j + m[1];
        if (i2 < 0 || i2 >= ni || j2 < 0 || j2 >= nj) continue;
        const std::int32_t b = id(i2, j2);
        if (b < 0 || (on_boundary[a] && on_boundary[b])) continue;
        const Vec3& p = pos[a];
        const Vec3& q = pos[b];
        const Vec3 mid = 0.5 * (p + q);
        if (std::hypot(mid[0], mid[1]) >= R) continue;
        edges.push_back({a, b, field(mid).dot(q - p), (q - p).norm()});
      }
    }
  for (std::int32_t v = 0; v < hub; ++v)
    if (on_boundary[v]) edges.push_back({hub, v, 0.0, 0.0});
  const RatioGraph g = make_ratio_graph(std::move(pos), std::move(on_boundary), hub, edges);

  HalfDiscResult out;
  out.search = max_ratio_cycle(g, tol);
  out.value = out.search.value;
  if (!out.search.cycle.empty()) {
    const CurveCurrent c = cycle_to_curve(g, out.search.cycle);
    out.closed = c.closed;
    for (const Vec3& v : c.vertices) out.curve.emplace_back(v[0], v[1]);
  }
  return out;
}

double norm_star_halfdisc(double R, int resolution) { return norm_star_halfdisc_full(R, resolution).value; }

}  // namespace glmeissner
