#include "devroll/counterexample.hpp"

#include <cmath>
#include <string>

#include "devroll/io.hpp"

namespace devroll {

namespace {

std::vector<expr::Expr> parse_all(const std::vector<std::string>& src, int n_vars) {
  std::vector<expr::Expr> out;
  for (const auto& s : src) out.push_back(expr::Expr::parse(s, n_vars));
  return out;
}

}  // namespace

CounterexampleReport demo_counterexample(double r, const CounterexampleOptions& opts) {
  if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("slope r must lie in [0, 1)");
  if (!(opts.arclength > 0.0)) throw InvalidArgument("arclength must be positive");
  const ChartManifold m = catalog::slab_torus(r);
  const auto [t1, t2] = slab_torus_distributions(r);
  const std::string rs = io::format_double(r);

  CounterexampleReport rep;
  rep.r = r;
  rep.base = Vec(3);
  rep.base << 0.5, 0.0, 0.0;

  // A closed probe loop through the base point, moving in every direction.
  const ChartPath probe = ChartPath::expressions(
      parse_all({"0.5 + 0.2*sin(2*pi*t)", "0.3*sin(2*pi*t) + 0.1*sin(4*pi*t)", "0.2*cos(2*pi*t) - 0.2"}, 0), 0.0,
      1.0);
  rep.parallel_t1 = check_parallel(m, t1, probe, opts.integrator);
  rep.parallel_t2 = check_parallel(m, t2, probe, opts.integrator);

  // Generic time-dependent steering in T1 and T2.
  const TangentCurve v1 = TangentCurve::expressions(
      rep.base, parse_all({"0.2*cos(t)", "0.3 + 0.1*t", rs + "*(0.3 + 0.1*t)"}, 0), 1.0);
  const TangentCurve v2 = TangentCurve::expressions(
      rep.base, parse_all({"0", "-" + rs + "*(0.25 + 0.05*sin(t))", "0.25 + 0.05*sin(t)"}, 0), 1.0);
  rep.parallelogram = parallelogram_check(m, t1, t2, rep.base, v1, v2, 1.0, opts.integrator);

  DerhamOptions dopt;
  dopt.points = opts.lattice_points;
  dopt.radius = opts.lattice_radius;
  dopt.exec = opts.exec;
  dopt.integrator = opts.integrator;
  rep.derham = derham_local_isometry(m, t1, t2, rep.base, dopt);

  Vec w(3);
  w << 0.0, -r, 1.0;
  w /= w.norm();
  LeafOptions lopt;
  lopt.epsilon = opts.epsilon;
  lopt.exec = opts.exec;
  lopt.integrator = opts.integrator;
  rep.leaf = leaf_trace(m, t2, TangentCurve::constant(rep.base, w, opts.arclength), lopt);
  rep.orbit_closes = rep.leaf.min_return_distance <= kClosedOrbitTolerance;
  return rep;
}

}  // namespace devroll
