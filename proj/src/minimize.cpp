#include "glmeissner/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

#include <Eigen/Core>

#include "gl_kernel.hpp"
#include "glmeissner/error.hpp"
#include "glmeissner/normstar.hpp"
#include "glmeissner/parallel.hpp"

namespace glmeissner {

namespace {

double wrap(double a) {
  a = std::remainder(a, 2 * M_PI);
  return a <= -M_PI ? a + 2 * M_PI : a;
}

// Same summation order as gl_total_energy.
double split_total(const GLState& s, const detail::TermSums& t) {
  const double meissner = s.meissner ? s.hex * s.hex * s.meissner->J0 : 0.0;
  const double free = t.kinetic + t.potential + t.field_inside;
  return meissner + free + t.field_outside + t.vorticity + t.r0;
}

// Flat layout: Re u, Im u per node, then the three edge components.
void pack(const GLState& s, Eigen::VectorXd& x) {
  const Index n = s.mesh->grid().size();
  x.resize(5 * n);
  for (Index i = 0; i < n; ++i) {
    x[2 * i] = s.u.values[i].real();
    x[2 * i + 1] = s.u.values[i].imag();
  }
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < n; ++i) x[(2 + d) * n + i] = s.A.c[d][i];
}

void unpack(const Eigen::VectorXd& x, GLState& s) {
  const Index n = s.mesh->grid().size();
  for (Index i = 0; i < n; ++i) s.u.values[i] = Complex(x[2 * i], x[2 * i + 1]);
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < n; ++i) s.A.c[d][i] = x[(2 + d) * n + i];
}

void pack_gradient(const ComplexField& du, const VectorField& dA, Eigen::VectorXd& g) {
  const Index n = Index(du.values.size());
  g.resize(5 * n);
  for (Index i = 0; i < n; ++i) {
    g[2 * i] = du.values[i].real();
    g[2 * i + 1] = du.values[i].imag();
  }
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < n; ++i) g[(2 + d) * n + i] = dA.c[d][i];
}

// Eigen's reduction is sequential, hence reproducible for a given build.
double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }

// Evaluates energy and gradient at x; s is the scratch state.
struct Objective {
  GLState s;
  detail::GLWorkspace ws;
  ComplexField du;
  VectorField dA;
  int evaluations = 0;

  double value_grad(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    unpack(x, s);
    ++evaluations;
    const double f = split_total(s, detail::gl_terms(s, &du, &dA, ws));
    pack_gradient(du, dA, g);
    return f;
  }
};

}  // namespace

void MinimizeOptions::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::kValidationError, "max_iters must be >= 1");
  if (!(grad_tol > 0)) throw Error(ErrorCode::kValidationError, "grad_tol must be positive");
  if (!(eta > 0)) throw Error(ErrorCode::kValidationError, "step size must be positive");
  if (!(c1 > 0 && c1 < 1)) throw Error(ErrorCode::kValidationError, "Armijo constant must lie in (0, 1)");
  if (!(shrink > 0 && shrink < 1)) throw Error(ErrorCode::kValidationError, "shrink factor must lie in (0, 1)");
  if (!(momentum >= 0 && momentum < 1)) throw Error(ErrorCode::kValidationError, "momentum must lie in [0, 1)");
  if (lbfgs_memory < 1) throw Error(ErrorCode::kValidationError, "lbfgs_memory must be >= 1");
  if (gauge_fix_every < 0) throw Error(ErrorCode::kValidationError, "gauge_fix_every must be >= 0");
}

EnergyGradient energy_gradient(const GLState& s) {
  s.validate();
  EnergyGradient out;
  detail::GLWorkspace ws;
  out.energy = split_total(s, detail::gl_terms(s, &out.du, &out.dA, ws));
  return out;
}

double gradient_norm(const GLState& s, const EnergyGradient& g) {
  const double h = s.mesh->grid().h;
  const Index n = s.mesh->grid().size();
  double acc = deterministic_sum(n, [&](Index i) { return std::norm(g.du.values[i]); });
  for (int d = 0; d < 3; ++d) acc += deterministic_sum(n, [&](Index i) { return g.dA.c[d][i] * g.dA.c[d][i]; });
  return std::sqrt(acc) / std::pow(h, 1.5);
}

MinimizeResult minimize(const GLState& s0, const MinimizeOptions& opts) {
  opts.validate();
  s0.validate();
  const double h = s0.mesh->grid().h;
  const double h3 = h * h * h;
  const double gscale = std::pow(h, 1.5);

  Objective obj{s0, {}, {}, {}, 0};
  Eigen::VectorXd x, g, p, xn, gn, x_prev;
  pack(s0, x);
  double f = obj.value_grad(x, g);

  MinimizeResult res;
  struct Pair {
    Eigen::VectorXd s, y;
    double rho;  // 1 / (y . s)
  };
  std::deque<Pair> memory;
  double trial = opts.eta, last_t = opts.eta;
  bool first = true;
  auto gnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(dot(v, v)) / gscale; };
  auto record = [&](int it, double step, bool fixed) {
    res.trace.push_back({it, f, gnorm(g), step, fixed});
  };
  record(0, 0.0, false);

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double norm_g = gnorm(g);
    if (norm_g <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    // L2 gradient: the Euclidean one divided by the cell volume.
    const bool lbfgs = opts.method == Method::kLBFGS;
    if (lbfgs && !memory.empty()) {
      p = -g;
      std::vector<double> alpha(memory.size());
      for (int k = int(memory.size()) - 1; k >= 0; --k) {
        const Pair& m = memory[size_t(k)];
        alpha[size_t(k)] = m.rho * dot(m.s, p);
        p -= alpha[size_t(k)] * m.y;
      }
      const Pair& last = memory.back();
      p *= 1.0 / (last.rho * last.y.squaredNorm());
      for (size_t k = 0; k < memory.size(); ++k) {
        const Pair& m = memory[k];
        p += (alpha[k] - m.rho * dot(m.y, p)) * m.s;
      }
    } else {
      p = -g / h3;
      if (opts.momentum > 0 && x_prev.size() == x.size()) p += (opts.momentum / last_t) * (x - x_prev);
    }
    double slope = dot(g, p);
    if (!(slope < 0)) {
      memory.clear();
      p = -g / h3;
      slope = dot(g, p);
    }

    double t = (lbfgs && !memory.empty()) ? 1.0 : trial;
    if (lbfgs && memory.empty() && first) t = opts.eta;
    double fn = 0.0;
    if (opts.step_rule == StepRule::kFixed) {
      xn = x + t * p;
      fn = obj.value_grad(xn, gn);
    } else {
      const double t0 = t;
      bool retried = false;
      for (;;) {
        xn = x + t * p;
        fn = obj.value_grad(xn, gn);
        if (std::isfinite(fn) && fn <= f + opts.c1 * t * slope) break;
        t *= opts.shrink;
        if (t < 1e-14 * t0) {
          if (!retried && !memory.empty()) {
            // Quasi-Newton direction failed: restart from steepest descent.
            memory.clear();
            p = -g / h3;
            slope = dot(g, p);
            t = trial;
            retried = true;
            continue;
          }
          res.state = obj.s;
          unpack(x, res.state);
          throw Error(ErrorCode::kLineSearchStalled,
                      "step underflow at iteration " + std::to_string(it) + ", gradient norm " +
                          std::to_string(norm_g));
        }
      }
      if (!lbfgs || memory.empty()) trial = t == t0 ? 2.0 * t : t;
    }
    first = false;
    last_t = t;
    if (fn > f) res.monotone = false;

    if (lbfgs) {
      Pair m{xn - x, gn - g, 0.0};
      const double sy = dot(m.s, m.y);
      if (sy > 1e-12 * m.s.norm() * m.y.norm()) {
        m.rho = 1.0 / sy;
        if (int(memory.size()) == opts.lbfgs_memory) {
          // Recycle the oldest buffers.
          Pair old = std::move(memory.front());
          memory.pop_front();
          old.s = std::move(m.s);
          old.y = std::move(m.y);
          old.rho = m.rho;
          memory.push_back(std::move(old));
        } else {
          memory.push_back(std::move(m));
        }
      }
    }
    if (opts.momentum > 0) x_prev = x;
    x.swap(xn);
    g.swap(gn);
    f = fn;

    bool fixed = false;
    if (opts.gauge_fix_every > 0 && (it + 1) % opts.gauge_fix_every == 0) {
      unpack(x, obj.s);
      const GLState gs = gauge_transform(obj.s, coulomb_gauge(obj.s));
      pack(gs, x);
      f = obj.value_grad(x, g);
      memory.clear();
      x_prev.resize(0);
      fixed = true;
    }
    if (opts.record_history) record(it + 1, t, fixed);
  }

  res.iterations = it;
  res.evaluations = obj.evaluations;
  res.energy = f;
  res.grad_norm = gnorm(g);
  if (gnorm(g) <= opts.grad_tol) res.converged = true;
  if (!opts.record_history) record(it, 0.0, false);
  res.state = obj.s;
  unpack(x, res.state);
  return res;
}

// ------------------------------------------------------------------ seeding

namespace {

// Signed solid angle of triangle (a, b, c) seen from the origin.
double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double la = a.norm(), lb = b.norm(), lc = c.norm();
  const double num = a.dot(b.cross(c));
  const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
  return 2.0 * std::atan2(num, den);
}

}  // namespace

ComplexField seed_vortex(const MeshPtr& mesh_ptr, const CurveCurrent& curve, double core_radius) {
  const DomainMesh& mesh = *mesh_ptr;
  const Grid& g = mesh.grid();
  if (!(core_radius >= 2 * g.h))
    throw Error(ErrorCode::kCoreTooSmall, "core radius must be at least two grid spacings");
  curve.validate(mesh);

  // Close the curve outside the domain: out along the normals, then around
  // through a far point so the closing path never re-enters.
  std::vector<Vec3> loop = curve.vertices;
  const double diam = 2.0 * half_extent(mesh.shape()).maxCoeff();
  Vec3 fan = Vec3::Zero();
  if (!curve.closed) {
    const Shape& sh = mesh.shape();
    const Vec3 a = curve.vertices.front(), b = curve.vertices.back();
    const double D = 10.0 * diam;
    const Vec3 a_out = a + D * outward_normal(sh, a);
    const Vec3 b_out = b + D * outward_normal(sh, b);
    Vec3 axis = b_out - a_out;
    if (axis.norm() < 1e-12) axis = outward_normal(sh, b);
    axis.normalize();
    int k = 0;
    axis.cwiseAbs().minCoeff(&k);
    const Vec3 perp = axis.cross(Vec3::Unit(k)).normalized();
    const Vec3 q = 0.5 * (a_out + b_out) + D * perp;
    loop.push_back(b_out);
    loop.push_back(q);
    loop.push_back(a_out);
    fan = q;
  } else {
    for (const Vec3& v : loop) fan += v;
    fan /= double(loop.size());
  }
  const size_t m = loop.size();

  ComplexField u(mesh_ptr, Complex(1.0, 0.0));
  parallel_for(g.size(), [&](Index i) {
    if (!node_active(mesh, i)) return;
    const Vec3 x = g.position(i);
    double omega = 0.0;
    for (size_t k = 0; k < m; ++k) {
      const Vec3& p = loop[k];
      const Vec3& q = loop[(k + 1) % m];
      if ((p - fan).norm() < 1e-14 || (q - fan).norm() < 1e-14) continue;
      omega += triangle_solid_angle(fan - x, p - x, q - x);
    }
    const double r = distance_to_curve(x, curve);
    u.values[i] = std::polar(std::min(1.0, r / core_radius), 0.5 * omega);
  });
  return u;
}

CurveCurrent offset_curve(const DomainMesh& mesh, const CurveCurrent& curve) {
  const double h = mesh.spacing();
  const Vec3 shift = h * Vec3(0.37, 0.41, 0.23);
  CurveCurrent out = curve;
  const size_t n = out.vertices.size();
  for (size_t k = 0; k < n; ++k) {
    Vec3 v = curve.vertices[k] + shift;
    const bool end = !curve.closed && (k == 0 || k + 1 == n) && curve.endpoints_on_boundary;
    if (end || signed_distance(mesh.shape(), v) > 0) v = closest_point(mesh.shape(), v);
    out.vertices[k] = v;
  }
  return out;
}

double vortex_mass(const VorticityField& v) {
  const double h = v.mesh->grid().h;
  return v.total_turns() * h;
}

double vorticity_fraction_near(const VorticityField& v, const CurveCurrent& curve, double cells) {
  const Grid& g = v.mesh->grid();
  double near = 0.0, total = 0.0;
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i) {
      if (!v.valid[d][i] || v.winding[d][i] == 0.0) continue;
      const double w = std::abs(v.winding[d][i]);
      total += w;
      if (distance_to_curve(slot_position(g, Storage::kFace, d, i), curve) <= cells * g.h) near += w;
    }
  return total > 0 ? near / total : 1.0;
}

// -------------------------------------------------------------------- sweep

GLState perturbed_state(const GLState& s, double amplitude, std::uint64_t seed) {
  s.validate();
  if (!(amplitude >= 0)) throw Error(ErrorCode::kValidationError, "perturbation amplitude must be >= 0");
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GLState out = s;
  for (Index i = 0; i < g.size(); ++i) {
    if (!node_active(mesh, i)) continue;
    const double re = normal(rng), im = normal(rng);
    out.u.values[i] += amplitude * Complex(re, im);
  }
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i)
      if (mesh.edge_weight(d, i) > 0) out.A.c[d][i] += amplitude * normal(rng);
  return out;
}

NormStarResult seeding_curve(const MeshPtr& mesh, const MeissnerData& meissner, double curve_spacing, double tol) {
  const Shape& shape = mesh->shape();
  const double diam = 2.0 * half_extent(shape).maxCoeff();
  const double cs = curve_spacing > 0 ? curve_spacing : std::max(mesh->spacing(), diam / 16.0);
  const MeshPtr cm = build_mesh(shape, cs, 4);
  if (meissner.has_continuum) {
    const VectorField& B0 = meissner.B0;
    return norm_star(cm, [&B0](const Vec3& p) { return interpolate(B0, p); }, tol);
  }
  LondonOptions lo;
  lo.lattice = false;
  const VectorField& H = meissner.H0ex;
  const MeissnerData coarse = solve_london(cm, [&H](const Vec3& p) { return interpolate(H, p); }, lo);
  return norm_star(cm, coarse.B0, tol);
}

namespace {

BranchOutcome outcome(const MinimizeResult& r) {
  BranchOutcome o;
  const EnergyReport e = gl_total_energy(r.state);
  o.total = e.total;
  o.free_energy = e.free_energy;
  o.min_abs_u = min_abs_u(r.state);
  o.converged = r.converged;
  o.iterations = r.iterations;
  o.grad_norm = r.grad_norm;
  try {
    const VorticityField v = vorticity(r.state);
    o.vortex_mass = vortex_mass(v);
    o.vortexless = v.vortexless() && o.min_abs_u >= 0.5;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kZeroOnPlaquette) throw;
    o.vortex_mass = std::nan("");
    o.vortexless = false;
  }
  return o;
}

}  // namespace

SweepResult hc1_sweep(const MeshPtr& mesh, std::shared_ptr<const MeissnerData> meissner, double eps,
                      const std::vector<double>& hex_list, const SweepOptions& opts) {
  if (!meissner || !meissner->has_lattice)
    throw Error(ErrorCode::kMissingMeissnerData, "sweep needs lattice Meissner data");
  require_same_mesh(mesh, meissner->mesh);
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::kInvalidEpsilon, "eps must lie in (0, 1)");
  const double h = mesh->spacing();
  if (h > eps) throw Error(ErrorCode::kMeshTooCoarse, "spacing exceeds eps; vortex cores are not resolved");
  if (hex_list.empty()) throw Error(ErrorCode::kValidationError, "empty h_ex list");
  for (size_t k = 0; k < hex_list.size(); ++k) {
    if (!(hex_list[k] >= 0) || !std::isfinite(hex_list[k]))
      throw Error(ErrorCode::kValidationError, "h_ex values must be finite and >= 0");
    if (k > 0 && !(hex_list[k] > hex_list[k - 1]))
      throw Error(ErrorCode::kValidationError, "h_ex list must be strictly ascending");
  }
  opts.minimize.validate();

  SweepResult out;
  const VectorField& B0 = meissner->B0;
  CurveCurrent curve = opts.curve;
  if (curve.vertices.empty()) {
    const NormStarResult ns = seeding_curve(mesh, *meissner, opts.curve_spacing);
    curve = ns.curve;
    out.norm_star = ns.value;
  }
  out.curve = offset_curve(*mesh, curve);
  if (meissner->has_continuum) out.norm_star = line_integral(B0, out.curve) / out.curve.length();
  if (out.norm_star > 0) out.hc1_leading = std::abs(std::log(eps)) / (2.0 * out.norm_star);
  const double core = opts.core_radius > 0 ? opts.core_radius : std::max(eps, 2.0 * h);
  const ComplexField seeded_u = seed_vortex(mesh, out.curve, core);

  for (double hex : hex_list) {
    SweepRow row;
    row.hex = hex;
    row.meissner_energy = hex * hex * meissner->J0;
    GLState s = meissner_state(mesh, meissner, eps, hex);
    row.meissner = outcome(minimize(s, opts.minimize));
    s.u = seeded_u;
    row.seeded = outcome(minimize(s, opts.minimize));
    row.seeded_wins = row.seeded.total < row.meissner.total && !row.seeded.vortexless;
    const BranchOutcome& w = row.seeded_wins ? row.seeded : row.meissner;
    row.total_energy = w.total;
    row.vortex_mass = w.vortex_mass;
    row.min_abs_u = w.min_abs_u;
    row.vortexless = w.vortexless;
    out.rows.push_back(row);
  }

  for (size_t k = 0; k < out.rows.size(); ++k) {
    const SweepRow& r = out.rows[k];
    if (!r.seeded_wins) {
      if (out.crossed) out.monotone = false;
      continue;
    }
    if (out.crossed) continue;
    out.crossed = true;
    out.bracket_high = r.hex;
    if (k == 0) {
      out.bracket_low = 0.0;
      out.hc1_numeric = r.hex;
      continue;
    }
    const SweepRow& q = out.rows[k - 1];
    out.bracket_low = q.hex;
    const double g0 = q.seeded.total - q.meissner.total;
    const double g1 = r.seeded.total - r.meissner.total;
    out.hc1_numeric = g0 > 0 ? q.hex + (r.hex - q.hex) * g0 / (g0 - g1) : r.hex;
  }
  return out;
}

// -------------------------------------------------------------- convexity

GLState real_gauge(const GLState& s) {
  s.validate();
  if (!(min_abs_u(s) > 0)) throw Error(ErrorCode::kVortexPresent, "u vanishes at a node");
  const DomainMesh& mesh = *s.mesh;
  const Grid& g = mesh.grid();
  const double h = g.h;
  const Index n = g.size();
  // Phase by breadth-first unwrapping along Omega edges; consistent when
  // every plaquette winding vanishes.
  ScalarField phi(s.mesh, Storage::kNode);
  std::vector<std::uint8_t> seen(n, 0);
  std::queue<Index> queue;
  for (Index root = 0; root < n; ++root) {
    if (seen[root] || !node_active(mesh, root)) continue;
    seen[root] = 1;
    phi[root] = std::arg(s.u[root]);
    queue.push(root);
    while (!queue.empty()) {
      const Index p = queue.front();
      queue.pop();
      const auto c = g.ijk(p);
      for (int d = 0; d < 3; ++d) {
        const Index st = g.stride(d);
        if (g.has_edge(d, p) && mesh.edge_weight(d, p) > 0 && !seen[p + st]) {
          const double a = s.A.c[d][p];
          const double psi =
              wrap(std::arg(std::conj(s.u[p]) * s.u[p + st] * std::polar(1.0, -h * a))) + h * a;
          phi[p + st] = phi[p] + psi;
          seen[p + st] = 1;
          queue.push(p + st);
        }
        if (c[d] > 0 && mesh.edge_weight(d, p - st) > 0 && !seen[p - st]) {
          const double a = s.A.c[d][p - st];
          const double psi = wrap(std::arg(std::conj(s.u[p - st]) * s.u[p] * std::polar(1.0, -h * a))) + h * a;
          phi[p - st] = phi[p] - psi;
          seen[p - st] = 1;
          queue.push(p - st);
        }
      }
    }
  }
  for (double& v : phi.values) v = -v;
  GLState out = gauge_transform(s, phi);
  for (Index i = 0; i < n; ++i)
    if (seen[i]) out.u[i] = Complex(std::abs(s.u[i]), 0.0);
  return out;
}

double convexity_diagnostic(const GLState& s1, const GLState& s2, double c) {
  s1.validate();
  s2.validate();
  require_same_mesh(s1.mesh, s2.mesh);
  for (const GLState* s : {&s1, &s2}) {
    const double mu = min_abs_u(*s);
    if (mu < c) throw Error(ErrorCode::kVortexPresent, "min |u| = " + std::to_string(mu) + " below " + std::to_string(c));
    if (!vorticity(*s).vortexless()) throw Error(ErrorCode::kVortexPresent, "state carries plaquette winding");
  }
  if (s1.eps != s2.eps || s1.hex != s2.hex || s1.meissner != s2.meissner)
    throw Error(ErrorCode::kValidationError, "states differ in eps, h_ex or Meissner data");
  const GLState r1 = real_gauge(s1), r2 = real_gauge(s2);
  GLState mid = r1;
  for (size_t i = 0; i < mid.u.values.size(); ++i) mid.u.values[i] = 0.5 * (r1.u.values[i] + r2.u.values[i]);
  for (int d = 0; d < 3; ++d)
    for (size_t i = 0; i < mid.A.c[d].size(); ++i) mid.A.c[d][i] = 0.5 * (r1.A.c[d][i] + r2.A.c[d][i]);
  auto energy = [](const GLState& s) { return s.meissner ? gl_total_energy(s).total : free_energy(s); };
  return 0.5 * (energy(r1) + energy(r2)) - energy(mid);
}

}  // namespace glmeissner
