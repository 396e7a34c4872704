#include "glmeissner/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "glmeissner/error.hpp"

namespace glmeissner {

using nlohmann::json;
using nlohmann::ordered_json;

VectorFunction AppliedField::function() const {
  if (uniform_z) return [](const Vec3&) { return Vec3(0, 0, 1); };
  const std::vector<Expression> c = components;
  return [c](const Vec3& p) { return Vec3(c[0](p[0], p[1], p[2]), c[1](p[0], p[1], p[2]), c[2](p[0], p[1], p[2])); };
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kValidationError, field + ": " + why);
}

// Typed access to one JSON object; every key read is recorded so that the
// rest can be rejected as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "config" : path_, "must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) invalid(name(k), "unknown key");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }
  std::string name(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  double number(const std::string& k, double def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) invalid(name(k), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(name(k), "must be finite");
    return d;
  }
  double positive(const std::string& k, double def) {
    const double d = number(k, def);
    if (!(d > 0)) invalid(name(k), "must be positive");
    return d;
  }
  double nonnegative(const std::string& k, double def) {
    const double d = number(k, def);
    if (!(d >= 0)) invalid(name(k), "must be >= 0");
    return d;
  }
  long long integer(const std::string& k, long long def, long long lo) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) invalid(name(k), "must be an integer");
    const long long i = v.get<long long>();
    if (i < lo) invalid(name(k), "must be >= " + std::to_string(lo));
    return i;
  }
  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) invalid(name(k), "must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k, const std::string& def, const std::set<std::string>& allowed = {}) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) invalid(name(k), "must be a string");
    const std::string s = v.get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      invalid(name(k), "must be one of " + list);
    }
    return s;
  }
  std::vector<double> numbers(const std::string& k) {
    std::vector<double> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    if (!v.is_array()) invalid(name(k), "must be an array of numbers");
    for (const json& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) invalid(name(k), "must be an array of finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Shape parse_domain(const json& j) {
  Section s(j, "domain");
  const std::string kind = s.string("shape", "ball", {"ball", "box", "ellipsoid"});
  Shape shape;
  if (kind == "ball") {
    shape = Ball{s.positive("radius", 1.0)};
  } else if (kind == "box") {
    shape = Box{s.positive("a", 1.0), s.positive("b", 1.0), s.positive("c", 1.0)};
  } else {
    shape = Ellipsoid{s.positive("a", 1.0), s.positive("b", 1.0), s.positive("c", 1.0)};
  }
  return shape;
}

AppliedField parse_applied(const json& j) {
  AppliedField f;
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform_z") invalid("applied_field", "must be \"uniform_z\" or a custom object");
    return f;
  }
  Section s(j, "applied_field");
  s.string("type", "custom", {"custom", "uniform_z"});
  if (s.has("type") && s.raw("type") == "uniform_z") return f;
  f.uniform_z = false;
  for (const char* c : {"x", "y", "z"}) {
    if (!s.has(c)) invalid(s.name(c), "missing component expression");
    const json& e = s.raw(c);
    if (e.is_number()) {
      f.components.push_back(Expression::parse(e.dump()));
    } else if (e.is_string()) {
      try {
        f.components.push_back(Expression::parse(e.get<std::string>()));
      } catch (const Error& err) {
        throw Error(ErrorCode::kParseError, s.name(c) + ": " + err.what());
      }
    } else {
      invalid(s.name(c), "must be an expression string");
    }
  }
  return f;
}

CurveCurrent parse_curve(const json& j) {
  Section s(j, "curve");
  CurveCurrent c;
  c.closed = s.boolean("closed", false);
  c.endpoints_on_boundary = !c.closed;
  if (!s.has("vertices") || !s.raw("vertices").is_array()) invalid("curve.vertices", "must be an array of [x, y, z]");
  for (const json& v : s.raw("vertices")) {
    if (!v.is_array() || v.size() != 3) invalid("curve.vertices", "each vertex must be [x, y, z]");
    Vec3 p;
    for (int d = 0; d < 3; ++d) {
      if (!v[size_t(d)].is_number()) invalid("curve.vertices", "coordinates must be numbers");
      p[d] = v[size_t(d)].get<double>();
    }
    c.vertices.push_back(p);
  }
  if (c.vertices.size() < 2) invalid("curve.vertices", "need at least two vertices");
  return c;
}

void parse_minimize(const json& j, MinimizeOptions& m) {
  Section s(j, "minimize");
  const std::string method = s.string("method", m.method == Method::kLBFGS ? "lbfgs" : "gradient_descent",
                                      {"gradient_descent", "lbfgs"});
  m.method = method == "lbfgs" ? Method::kLBFGS : Method::kGradientDescent;
  const std::string rule = s.string("step_rule", m.step_rule == StepRule::kFixed ? "fixed" : "backtracking",
                                    {"fixed", "backtracking"});
  m.step_rule = rule == "fixed" ? StepRule::kFixed : StepRule::kBacktracking;
  m.max_iters = int(s.integer("max_iters", m.max_iters, 1));
  m.grad_tol = s.positive("grad_tol", m.grad_tol);
  m.eta = s.positive("eta", m.eta);
  m.c1 = s.positive("c1", m.c1);
  m.shrink = s.positive("shrink", m.shrink);
  m.momentum = s.nonnegative("momentum", m.momentum);
  m.lbfgs_memory = int(s.integer("lbfgs_memory", m.lbfgs_memory, 1));
  m.gauge_fix_every = int(s.integer("gauge_fix_every", m.gauge_fix_every, 0));
  m.record_history = s.boolean("record_history", m.record_history);
  try {
    m.validate();
  } catch (const Error& e) {
    invalid("minimize", e.what());
  }
}

void parse_london(const json& j, LondonOptions& o) {
  Section s(j, "london");
  o.exterior_correction = s.boolean("exterior_correction", o.exterior_correction);
  o.continuum = s.boolean("continuum", o.continuum);
  o.lattice = s.boolean("lattice", o.lattice);
  o.normalize = s.boolean("normalize", o.normalize);
  o.max_outer = int(s.integer("max_outer", o.max_outer, 1));
  o.max_iters = int(s.integer("max_iters", o.max_iters, 1));
  o.lattice_max_iters = int(s.integer("lattice_max_iters", o.lattice_max_iters, 1));
  o.surface_resolution = int(s.integer("surface_resolution", o.surface_resolution, 0));
  if (!o.continuum && !o.lattice) invalid("london", "continuum and lattice cannot both be off");
}

void parse_tolerances(const json& j, Tolerances& t) {
  Section s(j, "tolerances");
  t.london = s.positive("london", t.london);
  t.lattice = s.positive("lattice", t.lattice);
  t.normstar = s.positive("normstar", t.normstar);
  t.hodge = s.positive("hodge", t.hodge);
  t.divergence = s.positive("divergence", t.divergence);
}

void parse_splitcheck(const json& j, SplitcheckConfig& c) {
  Section s(j, "splitcheck");
  c.spacings = s.numbers("spacings");
  for (double h : c.spacings)
    if (!(h > 0)) invalid("splitcheck.spacings", "must be positive");
  for (size_t k = 1; k < c.spacings.size(); ++k)
    if (!(c.spacings[k] < c.spacings[k - 1])) invalid("splitcheck.spacings", "must be strictly decreasing");
  if (!c.spacings.empty() && c.spacings.size() < 2) invalid("splitcheck.spacings", "need at least two spacings");
  c.pad_length = s.positive("pad_length", c.pad_length);
  c.hex = s.nonnegative("hex", c.hex);
}

ordered_json shape_json(const Shape& shape) {
  ordered_json j;
  if (const auto* b = std::get_if<Ball>(&shape)) {
    j["shape"] = "ball";
    j["radius"] = b->radius;
  } else if (const auto* x = std::get_if<Box>(&shape)) {
    j["shape"] = "box";
    j["a"] = x->a;
    j["b"] = x->b;
    j["c"] = x->c;
  } else {
    const auto& e = std::get<Ellipsoid>(shape);
    j["shape"] = "ellipsoid";
    j["a"] = e.a;
    j["b"] = e.b;
    j["c"] = e.c;
  }
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset -> line and column.
    const size_t at = std::min(e.byte, text.size());
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParseError,
                "config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }

  RunConfig cfg;
  {
    Section s(j, "");
    if (s.has("domain")) cfg.domain = parse_domain(s.raw("domain"));
    try {
      validate_shape(cfg.domain);
    } catch (const Error& e) {
      invalid("domain", e.what());
    }
    cfg.spacing = s.positive("spacing", cfg.spacing);
    cfg.pad = int(s.integer("pad", cfg.pad, 1));
    if (s.has("applied_field")) cfg.applied = parse_applied(s.raw("applied_field"));
    cfg.eps = s.number("eps", cfg.eps);
    if (!(cfg.eps > 0 && cfg.eps < 1)) invalid("eps", "must lie in (0, 1)");
    cfg.hex = s.nonnegative("hex", cfg.hex);
    cfg.hex_list = s.numbers("hex_list");
    for (size_t k = 0; k < cfg.hex_list.size(); ++k) {
      if (!(cfg.hex_list[k] >= 0)) invalid("hex_list", "values must be >= 0");
      if (k > 0 && !(cfg.hex_list[k] > cfg.hex_list[k - 1])) invalid("hex_list", "must be strictly ascending");
    }
    if (s.has("tolerances")) parse_tolerances(s.raw("tolerances"), cfg.tolerances);
    if (s.has("london")) parse_london(s.raw("london"), cfg.london);
    if (s.has("minimize")) parse_minimize(s.raw("minimize"), cfg.minimize);
    cfg.start = s.string("start", cfg.start, {"meissner", "perturbed", "seeded"});
    cfg.perturbation = s.nonnegative("perturbation", cfg.perturbation);
    cfg.core_radius = s.nonnegative("core_radius", cfg.core_radius);
    if (s.has("curve")) cfg.curve = parse_curve(s.raw("curve"));
    cfg.curve_spacing = s.nonnegative("curve_spacing", cfg.curve_spacing);
    if (s.has("splitcheck")) parse_splitcheck(s.raw("splitcheck"), cfg.splitcheck);
    if (s.has("seed")) {
      const json& v = s.raw("seed");
      if (!v.is_number_unsigned()) invalid("seed", "must be a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    }
    cfg.output_dir = s.string("output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) invalid("output_dir", "must not be empty");
  }
  cfg.london.tol = cfg.tolerances.london;
  cfg.london.lattice_tol = cfg.tolerances.lattice;

  const Vec3 ext = half_extent(cfg.domain);
  if (cfg.spacing > ext.minCoeff()) invalid("spacing", "larger than the domain's smallest half extent");

  if (!cfg.applied.uniform_z) {
    const double rel = applied_divergence(cfg);
    if (!(rel <= cfg.tolerances.divergence)) {
      std::ostringstream msg;
      msg << "custom applied field has max |div H| / max |H| = " << rel << " > " << cfg.tolerances.divergence;
      throw Error(ErrorCode::kNotDivergenceFree, msg.str());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double applied_divergence(const RunConfig& cfg) {
  const VectorFunction H = cfg.applied.function();
  const Vec3 ext = half_extent(cfg.domain);
  const double h = cfg.spacing;
  const double d = 1e-3 * h;
  double max_div = 0.0, max_h = 0.0;
  const int n0 = int(std::floor(ext[0] / h)), n1 = int(std::floor(ext[1] / h)), n2 = int(std::floor(ext[2] / h));
  for (int k = -n2; k <= n2; ++k)
    for (int j = -n1; j <= n1; ++j)
      for (int i = -n0; i <= n0; ++i) {
        const Vec3 p = h * Vec3(i, j, k);
        if (signed_distance(cfg.domain, p) >= 0) continue;
        max_h = std::max(max_h, H(p).norm());
        double div = 0.0;
        for (int a = 0; a < 3; ++a) {
          const Vec3 e = d * Vec3::Unit(a);
          div += (8.0 * (H(p + e)[a] - H(p - e)[a]) - (H(p + 2 * e)[a] - H(p - 2 * e)[a])) / (12.0 * d);
        }
        if (!std::isfinite(div)) return INFINITY;
        max_div = std::max(max_div, std::abs(div));
      }
  if (!(max_h > 0)) invalid("applied_field", "vanishes identically in the domain");
  return max_div / max_h;
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["domain"] = shape_json(cfg.domain);
  j["spacing"] = cfg.spacing;
  j["pad"] = cfg.pad;
  if (cfg.applied.uniform_z) {
    j["applied_field"] = "uniform_z";
  } else {
    j["applied_field"] = {{"type", "custom"},
                          {"x", cfg.applied.components[0].text()},
                          {"y", cfg.applied.components[1].text()},
                          {"z", cfg.applied.components[2].text()}};
  }
  j["eps"] = cfg.eps;
  j["hex"] = cfg.hex;
  j["hex_list"] = cfg.hex_list;
  const Tolerances& t = cfg.tolerances;
  j["tolerances"] = {{"london", t.london},
                     {"lattice", t.lattice},
                     {"normstar", t.normstar},
                     {"hodge", t.hodge},
                     {"divergence", t.divergence}};
  const LondonOptions& l = cfg.london;
  j["london"] = {{"exterior_correction", l.exterior_correction},
                 {"continuum", l.continuum},
                 {"lattice", l.lattice},
                 {"normalize", l.normalize},
                 {"max_outer", l.max_outer},
                 {"max_iters", l.max_iters},
                 {"lattice_max_iters", l.lattice_max_iters},
                 {"surface_resolution", l.surface_resolution}};
  const MinimizeOptions& m = cfg.minimize;
  j["minimize"] = {{"method", m.method == Method::kLBFGS ? "lbfgs" : "gradient_descent"},
                   {"step_rule", m.step_rule == StepRule::kFixed ? "fixed" : "backtracking"},
                   {"max_iters", m.max_iters},
                   {"grad_tol", m.grad_tol},
                   {"eta", m.eta},
                   {"c1", m.c1},
                   {"shrink", m.shrink},
                   {"momentum", m.momentum},
                   {"lbfgs_memory", m.lbfgs_memory},
                   {"gauge_fix_every", m.gauge_fix_every},
                   {"record_history", m.record_history}};
  j["start"] = cfg.start;
  j["perturbation"] = cfg.perturbation;
  j["core_radius"] = cfg.core_radius;
  if (cfg.curve) {
    ordered_json verts = ordered_json::array();
    for (const Vec3& v : cfg.curve->vertices) verts.push_back({v[0], v[1], v[2]});
    j["curve"] = {{"closed", cfg.curve->closed}, {"vertices", verts}};
  }
  j["curve_spacing"] = cfg.curve_spacing;
  j["splitcheck"] = {{"spacings", cfg.splitcheck.spacings},
                     {"pad_length", cfg.splitcheck.pad_length},
                     {"hex", cfg.splitcheck.hex}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace glmeissner
