#include "devroll/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "devroll/cah.hpp"
#include "devroll/counterexample.hpp"
#include "devroll/decomposition.hpp"
#include "devroll/distribution.hpp"
#include "devroll/io.hpp"
#include "devroll/leaf.hpp"
#include "devroll/manifold.hpp"
#include "devroll/transport.hpp"
#include "devroll/variation.hpp"

namespace devroll::scenario {

namespace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Strict object reader: every key must be consumed before done().

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(label() + " must be an object");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string label() const { return path_.empty() ? "scenario" : "'" + path_ + "'"; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    if (!j_.contains(key)) throw SchemaError("missing required key '" + where(key) + "'");
    used_.insert(key);
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key) { return as_number(get(key), where(key)); }
  double number(const std::string& key, double def) {
    const json* v = find(key);
    return v ? as_number(*v, where(key)) : def;
  }
  long long integer(const std::string& key) { return as_integer(get(key), where(key)); }
  long long integer(const std::string& key, long long def) {
    const json* v = find(key);
    return v ? as_integer(*v, where(key)) : def;
  }
  std::string str(const std::string& key) { return as_string(get(key), where(key)); }
  std::string str(const std::string& key, const std::string& def) {
    const json* v = find(key);
    return v ? as_string(*v, where(key)) : def;
  }

  Vec vec(const std::string& key, int n = -1) { return as_vec(get(key), where(key), n); }
  Mat mat(const std::string& key, int rows = -1, int cols = -1) { return as_mat(get(key), where(key), rows, cols); }
  std::vector<double> numbers(const std::string& key) {
    const Vec v = vec(key);
    return {v.data(), v.data() + v.size()};
  }
  std::vector<std::string> strings(const std::string& key, int n = -1) {
    const json& a = get(key);
    if (!a.is_array()) throw SchemaError("'" + where(key) + "' must be an array of strings");
    if (n >= 0 && static_cast<int>(a.size()) != n)
      throw SchemaError("'" + where(key) + "' must have " + std::to_string(n) + " entries");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_string(a[i], where(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  std::vector<std::vector<std::string>> string_matrix(const std::string& key) {
    const json& a = get(key);
    if (!a.is_array()) throw SchemaError("'" + where(key) + "' must be an array of arrays");
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string w = where(key) + "[" + std::to_string(i) + "]";
      if (!a[i].is_array()) throw SchemaError("'" + w + "' must be an array of strings");
      std::vector<std::string> row;
      for (std::size_t j = 0; j < a[i].size(); ++j) row.push_back(as_string(a[i][j], w + "[" + std::to_string(j) + "]"));
      out.push_back(std::move(row));
    }
    return out;
  }
  std::vector<Vec> vec_list(const std::string& key, int n) {
    const json& a = get(key);
    if (!a.is_array() || a.empty()) throw SchemaError("'" + where(key) + "' must be a non-empty array");
    std::vector<Vec> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_vec(a[i], where(key) + "[" + std::to_string(i) + "]", n));
    return out;
  }

  Reader sub(const std::string& key) { return Reader(get(key), where(key)); }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw SchemaError("unknown key '" + where(it.key()) + "'");
  }

  static double as_number(const json& v, const std::string& w) {
    if (!v.is_number()) throw SchemaError("'" + w + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError("'" + w + "' must be finite");
    return d;
  }
  static long long as_integer(const json& v, const std::string& w) {
    if (!v.is_number_integer()) throw SchemaError("'" + w + "' must be an integer");
    return v.get<long long>();
  }
  static std::string as_string(const json& v, const std::string& w) {
    if (!v.is_string()) throw SchemaError("'" + w + "' must be a string");
    return v.get<std::string>();
  }
  static Vec as_vec(const json& v, const std::string& w, int n) {
    if (!v.is_array()) throw SchemaError("'" + w + "' must be an array of numbers");
    if (n >= 0 && static_cast<int>(v.size()) != n)
      throw SchemaError("'" + w + "' must have " + std::to_string(n) + " entries");
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = as_number(v[i], w + "[" + std::to_string(i) + "]");
    return out;
  }
  static Mat as_mat(const json& v, const std::string& w, int rows, int cols) {
    if (!v.is_array() || v.empty()) throw SchemaError("'" + w + "' must be a non-empty array of rows");
    if (rows >= 0 && static_cast<int>(v.size()) != rows)
      throw SchemaError("'" + w + "' must have " + std::to_string(rows) + " rows");
    const int c = cols >= 0 ? cols : (v[0].is_array() ? static_cast<int>(v[0].size()) : 0);
    Mat out(static_cast<int>(v.size()), c);
    for (std::size_t i = 0; i < v.size(); ++i) out.row(static_cast<int>(i)) = as_vec(v[i], w + "[" + std::to_string(i) + "]", c).transpose();
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Gates: named residuals with an upper (or lower) bound.

struct Bound {
  bool upper = true;
  double limit = 0.0;
};

const std::map<std::string, std::map<std::string, Bound>>& default_gates() {
  static const std::map<std::string, std::map<std::string, Bound>> table = {
      {"develop", {{"gram_drift", {true, 1e-7}}}},
      {"geodesic", {{"gram_drift", {true, 1e-7}}}},
      {"transport", {{"gram_drift", {true, 1e-7}}}},
      {"curvature", {{"antisymmetry", {true, 1e-6}}, {"pair_symmetry", {true, 1e-6}}, {"bianchi", {true, 1e-6}}}},
      {"variation", {{"skew", {true, 1e-7}}, {"oracle_difference", {true, 1e-5}}}},
      {"check-parallel", {{"residual", {true, 1e-7}}}},
      {"parallelogram", {{"endpoint_mismatch", {true, 1e-7}}, {"holonomy_deviation", {true, 1e-7}}}},
      {"curvature-split", {{"split_residual", {true, 1e-6}}, {"invariance_residual", {true, 1e-6}}}},
      {"cah-transfer", {{"tau_residual", {true, 1e-7}}}},
      {"cah-welldefined", {{"spread", {true, 1e-5}}, {"tau_residual", {true, 1e-7}}}},
      {"derham-split", {{"pullback_residual", {true, 1e-4}}, {"order_mismatch", {true, 1e-8}}}},
      {"leaf-trace", {{"tangency", {true, 1e-7}}}},
      {"demo-counterexample",
       {{"parallel_t1", {true, 1e-9}},
        {"parallel_t2", {true, 1e-9}},
        {"endpoint_mismatch", {true, 1e-8}},
        {"holonomy_deviation", {true, 1e-8}},
        {"pullback_residual", {true, 1e-6}},
        {"order_mismatch", {true, 1e-8}},
        {"tangency", {true, 1e-7}}}},
  };
  return table;
}

// ---------------------------------------------------------------------------

struct Context {
  RunOptions opts;
  IntegratorOpts integ;
  std::uint64_t seed = 0;
  std::string command;
  std::map<std::string, Bound> bounds;
  json report = json::object();
  json gates = json::array();
  std::vector<std::string> artifacts;
  bool passed = true;
  std::string first_failure;
  bool numerical = false;
  std::string numerical_msg;

  void gate(const std::string& name, double value) {
    const Bound b = bounds.at(name);
    const bool ok = std::isfinite(value) && (b.upper ? value <= b.limit : value >= b.limit);
    json g = {{"name", name}, {"value", value}, {"pass", ok}};
    g[b.upper ? "max" : "min"] = b.limit;
    gates.push_back(std::move(g));
    if (!ok && passed) {
      passed = false;
      first_failure = name + " = " + io::format_double(value) + (b.upper ? " exceeds " : " is below ") +
                      io::format_double(b.limit);
    }
  }

  // Boundary hits are legitimate outcomes; other early stops are numerical failures.
  void status(StopReason r, const std::string& what) {
    if (r == StopReason::completed || r == StopReason::hit_boundary) return;
    if (!numerical) {
      numerical = true;
      numerical_msg = what + " stopped: " + to_string(r);
    }
  }

  std::string write(const std::string& name, const std::string& content) {
    io::write_atomic(opts.out_dir / name, content);
    artifacts.push_back(name);
    return name;
  }
};

// ---------------------------------------------------------------------------
// Input objects

struct ManifoldSpec {
  std::optional<ChartManifold> m;
  std::optional<double> slab_r;
  const ChartManifold& get() const { return *m; }
};

ManifoldSpec read_manifold(Reader r) {
  const std::string kind = r.str("kind");
  ManifoldSpec out;
  if (kind == "builtin") {
    const std::string name = r.str("name");
    static const json empty = json::object();
    const json* pj = r.find("params");
    Reader p(pj ? *pj : empty, r.where("params"));
    if (name == "euclidean") {
      out.m = catalog::euclidean(static_cast<int>(p.integer("n")));
    } else if (name == "sphere_stereo") {
      out.m = catalog::sphere_stereo(p.number("radius", 1.0), static_cast<int>(p.integer("n", 2)));
    } else if (name == "hyperbolic_halfplane") {
      out.m = catalog::hyperbolic_halfplane();
    } else if (name == "flat_torus") {
      out.m = catalog::flat_torus(static_cast<int>(p.integer("n")));
    } else if (name == "slab") {
      out.m = catalog::slab(p.number("length"));
    } else if (name == "slab_torus") {
      out.slab_r = p.number("r");
      out.m = catalog::slab_torus(*out.slab_r);
    } else {
      throw SchemaError("unknown builtin manifold '" + name + "'");
    }
    p.done();
  } else if (kind == "expr") {
    const int n = static_cast<int>(r.integer("dim"));
    const auto g = r.string_matrix("g");
    const std::string domain = r.str("domain", "");
    const std::string boundary = r.str("boundary", "");
    const std::string name = r.str("name", "expr");
    out.m = catalog::from_expressions(n, g, domain, boundary, name);
  } else if (kind == "product") {
    const json& f = r.get("factors");
    if (!f.is_array() || f.size() != 2) throw SchemaError("'" + r.where("factors") + "' must hold two manifolds");
    const ManifoldSpec a = read_manifold(Reader(f[0], r.where("factors[0]")));
    const ManifoldSpec b = read_manifold(Reader(f[1], r.where("factors[1]")));
    out.m = product(a.get(), b.get());
  } else {
    throw SchemaError("unknown manifold kind '" + kind + "'");
  }
  r.done();
  return out;
}

Distribution read_distribution(Reader r, const ManifoldSpec& ms) {
  const ChartManifold& m = ms.get();
  const int n = m.dim();
  const std::string kind = r.str("kind");
  std::optional<Distribution> d;
  if (kind == "factor") {
    const long long idx = r.integer("index");
    if (idx != 1 && idx != 2) throw SchemaError("'" + r.where("index") + "' must be 1 or 2");
    const auto pair = factor_distributions(m);
    d = idx == 1 ? pair.first : pair.second;
  } else if (kind == "slab_torus") {
    if (!ms.slab_r) throw SchemaError("slab_torus distributions need the builtin slab_torus manifold");
    const std::string which = r.str("which");
    const auto pair = slab_torus_distributions(*ms.slab_r);
    if (which == "T1") {
      d = pair.first;
    } else if (which == "T2") {
      d = pair.second;
    } else {
      throw SchemaError("'" + r.where("which") + "' must be \"T1\" or \"T2\"");
    }
  } else if (kind == "span") {
    d = Distribution::span(m, r.vec_list("vectors", n));
  } else if (kind == "projector") {
    d = Distribution::expressions(n, r.string_matrix("entries"), static_cast<int>(r.integer("rank")));
  } else if (kind == "constant") {
    d = Distribution::constant(r.mat("matrix", n, n), static_cast<int>(r.integer("rank")));
  } else {
    throw SchemaError("unknown distribution kind '" + kind + "'");
  }
  r.done();
  return *d;
}

std::vector<expr::Expr> parse_components(const std::vector<std::string>& src, bool allow_u) {
  std::vector<expr::Expr> out;
  for (const auto& s : src) out.push_back(expr::Expr::parse(s, 0, allow_u));
  return out;
}

TangentCurve read_curve(Reader r, const ChartPoint& base) {
  const int n = static_cast<int>(base.size());
  const std::string kind = r.str("kind");
  std::optional<TangentCurve> c;
  if (kind == "constant") {
    c = TangentCurve::constant(base, r.vec("value", n), r.number("horizon"));
  } else if (kind == "expr") {
    c = TangentCurve::expressions(base, parse_components(r.strings("components", n), false), r.number("horizon"));
  } else if (kind == "piecewise") {
    c = TangentCurve::piecewise_constant(base, r.numbers("breaks"), r.vec_list("values", n));
  } else if (kind == "samples") {
    c = TangentCurve::hermite(base, r.numbers("times"), r.vec_list("values", n));
  } else {
    throw SchemaError("unknown curve kind '" + kind + "'");
  }
  r.done();
  return *c;
}

ChartPath read_path(Reader r, int n) {
  const std::string kind = r.str("kind");
  std::optional<ChartPath> p;
  if (kind == "expr") {
    const auto comps = parse_components(r.strings("components", n), false);
    const double t0 = r.number("t0", 0.0);
    const double t1 = r.number("t1", 1.0);
    if (!(t1 > t0)) throw SchemaError("'" + r.where("t1") + "' must exceed t0");
    p = ChartPath::expressions(comps, t0, t1);
  } else if (kind == "samples") {
    p = ChartPath::samples(r.numbers("times"), r.vec_list("points", n));
  } else {
    throw SchemaError("unknown path kind '" + kind + "'");
  }
  r.done();
  return *p;
}

LinearIsometry read_phi(Reader r, const ChartManifold& m, const ChartManifold& mt) {
  const int n = m.dim();
  const std::string kind = r.str("kind");
  const Vec source = r.vec("source", n);
  const Vec target = r.vec("target", n);
  std::optional<LinearIsometry> phi;
  if (kind == "frame") {
    const Mat q = r.has("rotation") ? r.mat("rotation", n, n) : Mat::Identity(n, n);
    phi = frame_isometry(m, mt, source, target, q);
  } else if (kind == "matrix") {
    phi = make_isometry(m, mt, r.mat("matrix", n, n), source, target);
  } else {
    throw SchemaError("unknown isometry kind '" + kind + "'");
  }
  r.done();
  return *phi;
}

IntegratorOpts read_integrator(const json* j) {
  IntegratorOpts o;
  if (!j) return o;
  Reader r(*j, "integrator");
  o.step = r.number("step", o.step);
  const std::string method = r.str("method", "rk4");
  if (method == "rk4") {
    o.method = Method::rk4;
  } else if (method == "rkf45") {
    o.method = Method::rkf45;
  } else {
    throw SchemaError("'integrator.method' must be \"rk4\" or \"rkf45\"");
  }
  const long long ms = r.integer("max_steps", static_cast<long long>(o.max_steps));
  const long long stride = r.integer("sample_stride", static_cast<long long>(o.sample_stride));
  if (ms < 1) throw SchemaError("'integrator.max_steps' must be positive");
  if (stride < 1) throw SchemaError("'integrator.sample_stride' must be positive");
  o.max_steps = static_cast<std::size_t>(ms);
  o.sample_stride = static_cast<std::size_t>(stride);
  o.tolerance = r.number("tolerance", o.tolerance);
  r.done();
  validate(o);
  return o;
}

json development_summary(const DevelopmentResult& d) {
  return {{"status", to_string(d.status)},
          {"t_stop", d.t_stop},
          {"endpoint", io::to_json(d.back().x)},
          {"endpoint_frame", io::to_json(d.back().frame)},
          {"steps", d.steps},
          {"max_gram_drift", d.max_gram_drift},
          {"max_condition", d.max_condition}};
}

// ---------------------------------------------------------------------------
// Commands. Each reads all of its parameters (rejecting unknown keys) before computing.

void finish_development(Context& ctx, const DevelopmentResult& d) {
  ctx.report["development"] = development_summary(d);
  ctx.report["status"] = to_string(d.status);
  ctx.report["trajectory"] = ctx.write("trajectory.csv", io::trajectory_csv(d, ctx.opts.frames));
  ctx.status(d.status, "development");
  ctx.gate("gram_drift", d.max_gram_drift);
}

void cmd_develop(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Vec point = p.vec("point", m.dim());
  const TangentCurve v = read_curve(p.sub("curve"), point);
  p.done();
  finish_development(ctx, develop(m, v, ctx.integ));
}

void cmd_geodesic(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Vec point = p.vec("point", m.dim());
  const Vec velocity = p.vec("velocity", m.dim());
  const double horizon = p.number("horizon");
  p.done();
  finish_development(ctx, geodesic(m, point, velocity, horizon, ctx.integ));
}

void cmd_transport(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const ChartPath path = read_path(p.sub("path"), m.dim());
  std::optional<Vec> x0;
  if (p.has("vector")) x0 = p.vec("vector", m.dim());
  p.done();
  const DevelopmentResult r = transport_along(m, path, ctx.integ);
  ctx.report["transport"] = development_summary(r);
  ctx.report["transport_matrix"] = io::to_json(Mat(r.back().frame.transpose()));
  ctx.report["status"] = to_string(r.status);
  if (x0) {
    const Vec moved = r.back().frame.transpose() * *x0;
    ctx.report["vector"] = {{"initial", io::to_json(*x0)},
                            {"transported", io::to_json(moved)},
                            {"norm_initial", m.norm(r.front().x, *x0)},
                            {"norm_transported", m.norm(r.back().x, moved)}};
  }
  ctx.report["trajectory"] = ctx.write("trajectory.csv", io::trajectory_csv(r, true));
  ctx.status(r.status, "transport");
  ctx.gate("gram_drift", r.max_gram_drift);
}

void cmd_curvature(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const std::vector<Vec> points = p.vec_list("points", m.dim());
  p.done();
  const int n = m.dim();
  json list = json::array();
  double anti = 0.0, pair = 0.0, bianchi = 0.0;
  for (const auto& x : points) {
    const CurvatureTensor r = m.curvature_at(x);
    json comps = json::array();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) comps.push_back(r(i, j, k, l));
    json sectional = json::array();
    const Mat g = m.metric_at(x);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        sectional.push_back({{"plane", {i, j}},
                             {"value", r.sectional(g, Vec::Unit(n, i), Vec::Unit(n, j))}});
    anti = std::max(anti, r.antisymmetry_residual());
    pair = std::max(pair, r.pair_symmetry_residual());
    bianchi = std::max(bianchi, r.bianchi_residual());
    list.push_back({{"point", io::to_json(x)},
                    {"components", std::move(comps)},
                    {"sectional", std::move(sectional)},
                    {"antisymmetry_residual", r.antisymmetry_residual()},
                    {"pair_symmetry_residual", r.pair_symmetry_residual()},
                    {"bianchi_residual", r.bianchi_residual()}});
  }
  ctx.report["points"] = std::move(list);
  ctx.report["status"] = "completed";
  ctx.gate("antisymmetry", anti);
  ctx.gate("pair_symmetry", pair);
  ctx.gate("bianchi", bianchi);
}

void cmd_variation(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const int n = m.dim();
  const Vec point = p.vec("point", n);
  const auto comps = p.strings("components", n);
  std::optional<Mat> basis;
  if (p.has("basis")) basis = p.mat("basis", n, n);
  const double horizon = p.number("horizon", 1.0);
  const double u0 = p.number("u0", 0.0);
  const double du = p.number("du", 1e-4);
  p.done();
  if (!(du > 0.0)) throw SchemaError("'params.du' must be positive");
  const VariationFamily fam(m, point, comps, basis, horizon);
  const VariationField field = solve_variation(m, fam, u0, ctx.integ);
  ctx.status(field.status, "variation");
  ctx.report["status"] = to_string(field.status);
  ctx.report["basis"] = io::to_json(fam.basis());
  ctx.report["base"] = development_summary(field.base);
  ctx.report["U_end"] = io::to_json(field.samples.back().U);
  ctx.report["X_end"] = io::to_json(field.samples.back().X);
  ctx.report["max_skew"] = field.max_skew;
  ctx.report["variation"] = ctx.write("variation.csv", io::variation_csv(field, ctx.opts.frames));
  double diff = std::numeric_limits<double>::infinity();
  if (field.completed()) {
    const FdVariation fd = variation_fd_oracle(m, fam, u0, du, ctx.integ);
    if (fd.U.size() != field.samples.size()) throw NumericalError("oracle and solver sample grids differ");
    diff = 0.0;
    for (std::size_t k = 0; k < fd.U.size(); ++k)
      diff = std::max(diff, (fd.U[k] - field.samples[k].U).cwiseAbs().maxCoeff());
  }
  ctx.report["oracle_du"] = du;
  ctx.report["oracle_difference"] = diff;
  ctx.gate("skew", field.max_skew);
  ctx.gate("oracle_difference", diff);
}

void cmd_check_parallel(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Distribution d = read_distribution(p.sub("distribution"), ms);
  const ChartPath path = read_path(p.sub("path"), m.dim());
  p.done();
  const ParallelReport r = check_parallel(m, d, path, ctx.integ);
  ctx.status(r.status, "transport");
  ctx.report["status"] = to_string(r.status);
  ctx.report["residual"] = r.residual;
  ctx.report["rank"] = d.rank();
  ctx.gate("residual", r.residual);
}

void cmd_parallelogram(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Distribution d1 = read_distribution(p.sub("d1"), ms);
  const Distribution d2 = read_distribution(p.sub("d2"), ms);
  const Vec point = p.vec("point", m.dim());
  const TangentCurve v1 = read_curve(p.sub("v1"), point);
  const TangentCurve v2 = read_curve(p.sub("v2"), point);
  const double t = p.number("t");
  p.done();
  const SplitReport r = parallelogram_check(m, d1, d2, point, v1, v2, t, ctx.integ);
  json legs = json::array();
  for (std::size_t k = 0; k < r.legs.size(); ++k) {
    ctx.status(r.legs[k].status, "leg " + std::to_string(k));
    legs.push_back(ctx.write("leg" + std::to_string(k) + ".csv", io::trajectory_csv(r.legs[k], ctx.opts.frames)));
  }
  ctx.report["status"] = to_string(r.status);
  ctx.report["failed_leg"] = r.failed_leg;
  ctx.report["endpoint_mismatch"] = r.endpoint_mismatch;
  ctx.report["holonomy_deviation"] = r.holonomy_deviation;
  ctx.report["legs"] = std::move(legs);
  ctx.gate("endpoint_mismatch", r.endpoint_mismatch);
  ctx.gate("holonomy_deviation", r.holonomy_deviation);
}

void cmd_curvature_split(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Distribution d1 = read_distribution(p.sub("d1"), ms);
  const Distribution d2 = read_distribution(p.sub("d2"), ms);
  const Vec point = p.vec("point", m.dim());
  const long long count = p.integer("quadruples", 50);
  std::optional<ChartPath> path;
  if (p.has("path")) path = read_path(p.sub("path"), m.dim());
  p.done();
  if (count < 1) throw SchemaError("'params.quadruples' must be positive");
  const auto quads = random_quadruples(m.dim(), static_cast<std::size_t>(count), ctx.seed);
  const double split = curvature_split_check(m, d1, d2, point, quads);
  ctx.report["status"] = "completed";
  ctx.report["split_residual"] = split;
  ctx.report["quadruples"] = count;
  ctx.gate("split_residual", split);
  if (path) {
    const InvarianceReport inv = curvature_transport_invariance_check(m, d1, d2, *path, quads, ctx.integ);
    ctx.status(inv.status, "transport");
    ctx.report["status"] = to_string(inv.status);
    ctx.report["invariance_residual"] = inv.residual;
    ctx.report["tangency"] = inv.tangency;
    ctx.gate("invariance_residual", inv.residual);
  }
}

json transfer_summary(const TransferResult& t) {
  return {{"status", to_string(t.status)},
          {"t_stop", t.t_stop},
          {"endpoint", io::to_json(t.endpoint)},
          {"tau", io::to_json(t.tau.matrix)},
          {"tau_source", io::to_json(t.tau.source)},
          {"tau_residual", t.tau_residual}};
}

void cmd_cah_transfer(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const ManifoldSpec target = read_manifold(p.sub("target"));
  const LinearIsometry phi = read_phi(p.sub("phi"), m, target.get());
  std::optional<ChartPath> path;
  std::optional<TangentCurve> curve;
  if (p.has("path")) path = read_path(p.sub("path"), m.dim());
  if (p.has("curve")) curve = read_curve(p.sub("curve"), phi.source);
  p.done();
  if (path.has_value() == curve.has_value()) throw SchemaError("cah-transfer needs exactly one of 'path' or 'curve'");
  TransferResult t;
  if (path) {
    t = cah_transfer(m, target.get(), phi, *path, ctx.integ);
  } else {
    const DevelopmentResult gamma = develop(m, *curve, ctx.integ);
    ctx.status(gamma.status, "source development");
    ctx.report["source"] = development_summary(gamma);
    t = cah_transfer(m, target.get(), phi, gamma, ctx.integ);
  }
  ctx.status(t.status, "target development");
  ctx.report["status"] = to_string(t.status);
  ctx.report["transfer"] = transfer_summary(t);
  ctx.report["trajectory"] = ctx.write("target.csv", io::trajectory_csv(t.target, ctx.opts.frames));
  ctx.gate("tau_residual", t.tau_residual);
}

void cmd_cah_welldefined(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const ManifoldSpec target = read_manifold(p.sub("target"));
  const LinearIsometry phi = read_phi(p.sub("phi"), m, target.get());
  const PathFamily family(m.dim(), p.strings("homotopy", m.dim()));
  const long long slices = p.integer("slices", 9);
  p.done();
  if (slices < 2 || slices > 100000) throw SchemaError("'params.slices' must lie in [2, 100000]");
  const WelldefinedReport r = cah_welldefined_check(m, target.get(), phi, family, static_cast<int>(slices), ctx.integ);
  json list = json::array();
  for (std::size_t k = 0; k < r.u.size(); ++k) {
    ctx.status(r.status[k], "slice " + std::to_string(k));
    list.push_back({{"u", r.u[k]}, {"endpoint", io::to_json(r.endpoints[k])}, {"status", to_string(r.status[k])}});
  }
  ctx.report["status"] = r.completed ? "completed" : "incomplete";
  ctx.report["slices"] = std::move(list);
  ctx.report["spread"] = r.spread;
  ctx.report["max_tau_residual"] = r.max_tau_residual;
  ctx.gate("spread", r.spread);
  ctx.gate("tau_residual", r.max_tau_residual);
}

std::string nodes_csv(const DerhamReport& r, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? ",w" : "w") + std::to_string(i);
  out += ",valid";
  for (int i = 0; i < n; ++i) out += ",f" + std::to_string(i);
  for (int i = 0; i < n; ++i) out += ",fs" + std::to_string(i);
  out += '\n';
  for (const auto& node : r.nodes) {
    if (!node.active) continue;
    for (int i = 0; i < n; ++i) out += (i ? "," : "") + io::format_double(node.w[i]);
    out += node.valid ? ",1" : ",0";
    for (int i = 0; i < n; ++i) out += "," + (node.valid ? io::format_double(node.f[i]) : std::string("nan"));
    for (int i = 0; i < n; ++i) out += "," + (node.valid ? io::format_double(node.f_swapped[i]) : std::string("nan"));
    out += '\n';
  }
  return out;
}

json derham_summary(const DerhamReport& r) {
  return {{"pullback_residual", r.pullback_residual},
          {"order_mismatch", r.order_mismatch},
          {"spacing", r.spacing},
          {"cells", r.cells},
          {"invalid", r.invalid},
          {"basis1", io::to_json(r.basis1)},
          {"basis2", io::to_json(r.basis2)}};
}

void cmd_derham(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Distribution d1 = read_distribution(p.sub("d1"), ms);
  const Distribution d2 = read_distribution(p.sub("d2"), ms);
  DerhamOptions o;
  const Vec point = p.vec("point", m.dim());
  o.points = static_cast<int>(p.integer("points", o.points));
  o.radius = p.number("radius", o.radius);
  o.integrator = ctx.integ;
  p.done();
  const DerhamReport r = derham_local_isometry(m, d1, d2, point, o);
  ctx.report["status"] = r.invalid == 0 ? "completed" : "incomplete";
  ctx.report["derham"] = derham_summary(r);
  ctx.report["nodes"] = ctx.write("nodes.csv", nodes_csv(r, m.dim()));
  ctx.gate("pullback_residual", r.pullback_residual);
  ctx.gate("order_mismatch", r.order_mismatch);
}

json leaf_summary(const LeafReport& r) {
  json j = {{"development", development_summary(r.trajectory)}, {"tangency", r.tangency}, {"periodic", r.periodic}};
  if (r.periodic) {
    j["min_return_distance"] = r.min_return_distance;
    j["return_time"] = r.return_time;
    j["coverage_fraction"] = r.coverage_fraction;
  }
  return j;
}

void cmd_leaf_trace(Reader& p, const ManifoldSpec& ms, Context& ctx) {
  const ChartManifold& m = ms.get();
  const Distribution d = read_distribution(p.sub("distribution"), ms);
  const Vec point = p.vec("point", m.dim());
  const TangentCurve steering = read_curve(p.sub("curve"), point);
  LeafOptions o;
  o.t_min = p.number("t_min", o.t_min);
  o.epsilon = p.number("epsilon", o.epsilon);
  o.coverage_grid = static_cast<int>(p.integer("coverage_grid", o.coverage_grid));
  o.integrator = ctx.integ;
  p.done();
  const LeafReport r = leaf_trace(m, d, steering, o);
  ctx.status(r.trajectory.status, "leaf development");
  ctx.report["status"] = to_string(r.trajectory.status);
  ctx.report["leaf"] = leaf_summary(r);
  ctx.report["trajectory"] = ctx.write("trajectory.csv", io::trajectory_csv(r.trajectory, ctx.opts.frames));
  ctx.gate("tangency", r.tangency);
}

void cmd_demo(Reader& p, Context& ctx) {
  CounterexampleOptions o;
  const double r = p.number("r");
  o.arclength = p.number("arclength", o.arclength);
  o.lattice_points = static_cast<int>(p.integer("lattice_points", o.lattice_points));
  o.lattice_radius = p.number("lattice_radius", o.lattice_radius);
  o.epsilon = p.number("epsilon", o.epsilon);
  o.integrator = ctx.integ;
  p.done();
  const CounterexampleReport rep = demo_counterexample(r, o);
  ctx.status(rep.parallel_t1.status, "T1 probe transport");
  ctx.status(rep.parallel_t2.status, "T2 probe transport");
  ctx.status(rep.parallelogram.status, "parallelogram");
  ctx.status(rep.leaf.trajectory.status, "leaf development");
  ctx.report["status"] = to_string(rep.leaf.trajectory.status);
  ctx.report["r"] = rep.r;
  ctx.report["base"] = io::to_json(rep.base);
  ctx.report["check_parallel"] = {{"T1", rep.parallel_t1.residual}, {"T2", rep.parallel_t2.residual}};
  ctx.report["parallelogram"] = {{"endpoint_mismatch", rep.parallelogram.endpoint_mismatch},
                                 {"holonomy_deviation", rep.parallelogram.holonomy_deviation},
                                 {"status", to_string(rep.parallelogram.status)}};
  ctx.report["derham"] = derham_summary(rep.derham);
  ctx.report["leaf"] = leaf_summary(rep.leaf);
  ctx.report["min_return_distance"] = rep.leaf.min_return_distance;
  ctx.report["coverage_fraction"] = rep.leaf.coverage_fraction;
  ctx.report["orbit_closes"] = rep.orbit_closes;
  ctx.report["trajectory"] = ctx.write("leaf.csv", io::trajectory_csv(rep.leaf.trajectory, ctx.opts.frames));
  ctx.gate("parallel_t1", rep.parallel_t1.residual);
  ctx.gate("parallel_t2", rep.parallel_t2.residual);
  ctx.gate("endpoint_mismatch", rep.parallelogram.endpoint_mismatch);
  ctx.gate("holonomy_deviation", rep.parallelogram.holonomy_deviation);
  ctx.gate("pullback_residual", rep.derham.pullback_residual);
  ctx.gate("order_mismatch", rep.derham.order_mismatch);
  ctx.gate("tangency", rep.leaf.tangency);
}

RunResult execute(const json& scenario, const RunOptions& opts) {
  Context ctx;
  ctx.opts = opts;
  Reader top(scenario, "");
  const long long version = top.integer("schema");
  if (version != kSchemaVersion) throw SchemaError("unsupported schema version " + std::to_string(version));
  ctx.command = top.str("command");
  const auto& table = default_gates();
  const auto entry = table.find(ctx.command);
  if (entry == table.end()) throw SchemaError("unknown command '" + ctx.command + "'");
  ctx.bounds = entry->second;
  if (const json* s = top.find("seed")) {
    const long long seed = Reader::as_integer(*s, "seed");
    if (seed < 0) throw SchemaError("'seed' must be non-negative");
    ctx.seed = static_cast<std::uint64_t>(seed);
  }
  ctx.integ = read_integrator(top.find("integrator"));
  if (const json* g = top.find("gates")) {
    Reader gr(*g, "gates");
    for (auto it = g->begin(); it != g->end(); ++it) {
      if (!ctx.bounds.count(it.key())) throw SchemaError("unknown gate 'gates." + it.key() + "' for " + ctx.command);
      Reader b = gr.sub(it.key());
      const bool upper = b.has("max");
      if (upper == b.has("min")) throw SchemaError("'" + gr.where(it.key()) + "' needs exactly one of max or min");
      ctx.bounds[it.key()] = Bound{upper, b.number(upper ? "max" : "min")};
      b.done();
    }
    gr.done();
  }
  static const json empty = json::object();
  const json* pj = top.find("params");
  Reader params(pj ? *pj : empty, "params");

  ManifoldSpec ms;
  if (ctx.command == "demo-counterexample") {
    if (top.has("manifold")) throw SchemaError("'manifold' is not used by demo-counterexample");
  } else {
    ms = read_manifold(top.sub("manifold"));
  }
  top.done();

  ctx.report["schema"] = kSchemaVersion;
  ctx.report["command"] = ctx.command;
  ctx.report["seed"] = ctx.seed;
  if (ms.m) ctx.report["manifold"] = ms.get().name();

  const std::string& c = ctx.command;
  if (c == "develop") cmd_develop(params, ms, ctx);
  else if (c == "geodesic") cmd_geodesic(params, ms, ctx);
  else if (c == "transport") cmd_transport(params, ms, ctx);
  else if (c == "curvature") cmd_curvature(params, ms, ctx);
  else if (c == "variation") cmd_variation(params, ms, ctx);
  else if (c == "check-parallel") cmd_check_parallel(params, ms, ctx);
  else if (c == "parallelogram") cmd_parallelogram(params, ms, ctx);
  else if (c == "curvature-split") cmd_curvature_split(params, ms, ctx);
  else if (c == "cah-transfer") cmd_cah_transfer(params, ms, ctx);
  else if (c == "cah-welldefined") cmd_cah_welldefined(params, ms, ctx);
  else if (c == "derham-split") cmd_derham(params, ms, ctx);
  else if (c == "leaf-trace") cmd_leaf_trace(params, ms, ctx);
  else cmd_demo(params, ctx);

  ctx.report["gates"] = ctx.gates;
  ctx.report["passed"] = ctx.passed;
  ctx.artifacts.push_back("report.json");
  ctx.report["artifacts"] = ctx.artifacts;
  io::write_atomic(opts.out_dir / "report.json", io::to_json_text(ctx.report));

  RunResult res;
  res.artifacts = ctx.artifacts;
  res.report = ctx.report;
  if (ctx.numerical) {
    res.exit_code = numerical_failure;
    res.message = ctx.numerical_msg;
  } else if (!ctx.passed) {
    res.exit_code = gate_failed;
    res.message = "gate failed: " + ctx.first_failure;
  }
  return res;
}

RunResult failure(int code, const std::string& msg) {
  RunResult r;
  r.exit_code = code;
  r.message = msg;
  return r;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : default_gates()) out.push_back(k);
    return out;
  }();
  return names;
}

RunResult run(const nlohmann::json& scenario, const RunOptions& opts) {
  try {
    return execute(scenario, opts);
  } catch (const ParseError& e) {
    return failure(invalid_input, std::string("invalid expression: ") + e.what());
  } catch (const InvalidArgument& e) {
    return failure(invalid_input, e.what());
  } catch (const DomainError& e) {
    return failure(invalid_input, std::string("domain error: ") + e.what());
  } catch (const NumericalError& e) {
    return failure(numerical_failure, std::string("numerical failure: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    return failure(invalid_input, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return failure(invalid_input, std::string("output error: ") + e.what());
  } catch (const Error& e) {
    return failure(numerical_failure, e.what());
  }
}

RunResult run_file(const std::filesystem::path& path, const RunOptions& opts) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return failure(invalid_input, "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    return failure(invalid_input, path.string() + ": " + e.what());
  }
  return run(j, opts);
}

}  // namespace devroll::scenario
