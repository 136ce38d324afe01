#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "devroll/expr.hpp"
#include "devroll/transport.hpp"
#include "support.hpp"

using namespace devroll;
using testing::max_abs;

namespace {

constexpr double pi = std::numbers::pi;

// Second-order geodesic equation x'' = -Gamma(x', x') with extra vectors carried
// by X' = -Gamma(x', X); classical RK4 with its own loop.
struct GeodesicOracle {
  Vec x, xd;
  std::vector<Vec> carried;
};

GeodesicOracle geodesic_oracle(const ChartManifold& m, const Vec& p, const Vec& v0, double T, double h,
                               std::vector<Vec> carried = {}) {
  const int n = m.dim();
  const int c = static_cast<int>(carried.size());
  Vec y(2 * n + c * n);
  y << p, v0, Vec::Zero(c * n);
  for (int k = 0; k < c; ++k) y.segment(2 * n + k * n, n) = carried[static_cast<std::size_t>(k)];
  auto f = [&](const Vec& s) {
    const Christoffel g = m.christoffel(s.head(n));
    const Vec xd = s.segment(n, n);
    Vec d(s.size());
    d.head(n) = xd;
    d.segment(n, n) = -g.contract(xd, xd);
    for (int k = 0; k < c; ++k) d.segment(2 * n + k * n, n) = -g.contract(xd, s.segment(2 * n + k * n, n));
    return d;
  };
  const int steps = static_cast<int>(std::ceil(T / h - 1e-9));
  const double hh = T / steps;
  for (int k = 0; k < steps; ++k) {
    const Vec k1 = f(y), k2 = f(y + 0.5 * hh * k1), k3 = f(y + 0.5 * hh * k2), k4 = f(y + hh * k3);
    y += hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  GeodesicOracle out{y.head(n), y.segment(n, n), {}};
  for (int k = 0; k < c; ++k) out.carried.push_back(y.segment(2 * n + k * n, n));
  return out;
}

std::vector<expr::Expr> exprs(std::initializer_list<const char*> src) {
  std::vector<expr::Expr> out;
  for (const char* s : src) out.push_back(expr::Expr::parse(s, 0));
  return out;
}

}  // namespace

TEST_CASE("flat development") {
  const auto e2 = catalog::euclidean(2);
  const auto r = develop(e2, TangentCurve::constant(Vec::Zero(2), Vec{{1.0, 0.0}}, 1.0));
  CHECK(r.completed());
  CHECK(r.front().x == Vec::Zero(2));
  CHECK(r.front().frame == Mat::Identity(2, 2));
  CHECK(max_abs(r.back().x - Vec{{1.0, 0.0}}) <= 1e-14);
  for (const auto& s : r.samples) CHECK(max_abs(s.frame - Mat::Identity(2, 2)) == 0.0);

  const auto e3 = catalog::euclidean(3);
  const Vec p{{1.0, -2.0, 0.5}}, v{{0.3, 0.7, -1.1}};
  CHECK(max_abs(geodesic(e3, p, v, 2.5).back().x - (p + 2.5 * v)) <= 1e-13);
}

TEST_CASE("constant v develops to the geodesic oracle") {
  const auto s = catalog::sphere_stereo(1.0);
  const Vec p{{0.3, -0.2}}, v{{0.4, 0.9}};
  const auto r = develop(s, TangentCurve::constant(p, v, 2.0));
  const auto o = geodesic_oracle(s, p, v, 2.0, 1e-3);
  CHECK(max_abs(r.back().x - o.x) <= 1e-9);
  CHECK(max_abs(r.back().velocity - o.xd) <= 1e-9);
}

TEST_CASE("closed-form geodesics") {
  // sphere: the chart origin is a pole, meridians are rays with x = tan(t/2)
  const auto s = catalog::sphere_stereo(1.0);
  CHECK(std::abs(geodesic(s, Vec::Zero(2), Vec{{0.5, 0.0}}, 2.0).back().x[0] - std::tan(1.0)) <= 1e-9);

  // antipode of (0.5, 0) is (-2, 0); unit speed there needs |v| = 1/1.6
  const auto a = geodesic(s, Vec{{0.5, 0.0}}, Vec{{0.0, 1.0 / 1.6}}, pi);
  CHECK(a.completed());
  CHECK(max_abs(a.back().x - Vec{{-2.0, 0.0}}) <= 1e-6);

  // half-plane: horizontal unit start at (0,1) follows (tanh t, sech t)
  const auto h = geodesic(catalog::hyperbolic_halfplane(), Vec{{0.0, 1.0}}, Vec{{1.0, 0.0}}, 1.0);
  CHECK(std::abs(h.back().x[0] - std::tanh(1.0)) <= 1e-7);
  CHECK(std::abs(h.back().x[1] - 1.0 / std::cosh(1.0)) <= 1e-7);
}

TEST_CASE("piecewise-constant v is a broken geodesic") {
  const auto s = catalog::sphere_stereo(1.0);
  const Vec p{{0.2, 0.1}}, va{{0.6, 0.1}}, vb{{-0.2, 0.7}};
  const auto r = develop(s, TangentCurve::piecewise_constant(p, {0.0, 0.8, 1.7}, {va, vb}));
  CHECK(r.completed());
  // first leg carries vb along; the second leg starts with the carried vector
  const auto leg1 = geodesic_oracle(s, p, va, 0.8, 1e-3, {vb});
  const auto leg2 = geodesic_oracle(s, leg1.x, leg1.carried[0], 0.9, 1e-3);
  CHECK(max_abs(r.back().x - leg2.x) <= 1e-8);
}

TEST_CASE("boundary stop") {
  const auto r = develop(catalog::slab(1.0), TangentCurve::constant(Vec{{0.5}}, Vec{{1.0}}, 1.0));
  CHECK(r.status == StopReason::hit_boundary);
  CHECK(std::abs(r.t_stop - 0.5) <= 1e-12);
  CHECK(std::abs(r.back().x[0] - 1.0) <= 1e-11);

  const auto rev = develop(catalog::slab(1.0), TangentCurve::constant(Vec{{0.25}}, Vec{{-2.0}}, 1.0));
  CHECK(rev.status == StopReason::hit_boundary);
  CHECK(std::abs(rev.t_stop - 0.125) <= 1e-12);

  // a start on the boundary is not interior
  CHECK_THROWS_AS(develop(catalog::slab(1.0), TangentCurve::constant(Vec{{0.0}}, Vec{{1.0}}, 1.0)), InvalidArgument);

  // polar chart: a radial geodesic into the origin leaves the chart at t = 1
  const auto polar = catalog::from_expressions(2, {{"1", "0"}, {"0", "x0^2"}}, "x0 > 0");
  const auto out = geodesic(polar, Vec{{1.0, 0.3}}, Vec{{-1.0, 0.0}}, 2.0);
  CHECK(out.status == StopReason::left_chart);
  CHECK(out.t_stop <= 1.0);
  CHECK(out.t_stop > 0.99);
}

TEST_CASE("Gram drift over T = 5 on the catalog") {
  struct Case {
    ChartManifold m;
    Vec p;
    std::vector<expr::Expr> v;
  };
  const std::vector<Case> cases = {
      {catalog::euclidean(2), Vec{{0.0, 0.0}}, exprs({"cos(t)", "sin(2*t)"})},
      {catalog::sphere_stereo(1.0), Vec{{0.3, 0.1}}, exprs({"0.5*cos(t)", "0.4*sin(t)"})},
      {catalog::sphere_stereo(2.0, 3), Vec{{0.3, 0.1, -0.2}}, exprs({"0.5*cos(t)", "0.4*sin(t)", "0.2"})},
      {catalog::hyperbolic_halfplane(), Vec{{0.0, 1.0}}, exprs({"0.3*cos(t)", "0.1*sin(t)"})},
      {catalog::flat_torus(2), Vec{{0.5, 0.5}}, exprs({"1", "t"})},
      {catalog::slab(1.0), Vec{{0.5}}, exprs({"0.05*cos(t)"})},
      {catalog::slab_torus(0.618), Vec{{0.5, 0.0, 0.0}}, exprs({"0.05*sin(t)", "1", "cos(t)"})},
      {product(catalog::sphere_stereo(1.0), catalog::hyperbolic_halfplane()), Vec{{0.1, 0.2, 0.0, 1.0}},
       exprs({"0.3", "0.2*sin(t)", "0.1*cos(t)", "0.1*sin(t)"})},
  };
  for (const auto& c : cases) {
    INFO(c.m.name());
    const auto r = develop(c.m, TangentCurve::expressions(c.p, c.v, 5.0));
    CHECK(r.completed());
    CHECK(r.max_gram_drift <= 1e-7);
    CHECK(gram_drift(c.m, r) == r.max_gram_drift);
  }
}

TEST_CASE("velocity residual against a five-point stencil") {
  const auto s = catalog::sphere_stereo(1.0);
  const auto r = develop(s, TangentCurve::expressions(Vec{{0.1, 0.2}}, exprs({"0.5*cos(t)", "0.5*sin(3*t)"}), 2.0));
  const double h = 1e-3;
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < r.samples.size(); ++k) {
    const Vec fd = (r.samples[k - 2].x - 8.0 * r.samples[k - 1].x + 8.0 * r.samples[k + 1].x - r.samples[k + 2].x) /
                   (12.0 * h);
    worst = std::max(worst, max_abs(fd - r.samples[k].velocity));
  }
  CHECK(worst <= 10.0 * std::pow(h, 4) * 10.0);
}

TEST_CASE("restart identity") {
  const auto s = catalog::sphere_stereo(1.0);
  const auto v = TangentCurve::expressions(Vec::Zero(2), exprs({"0.3*cos(t)", "0.3*sin(t)"}), 1.0);
  const auto whole = develop(s, v);
  const auto tail = restart(s, whole, v, 0.4);
  CHECK(tail.completed());
  CHECK(max_abs(tail.back().x - whole.back().x) <= 1e-8);
  CHECK(max_abs(tail.back().frame - whole.back().frame) <= 1e-8);
  const auto fine = develop(s, v, IntegratorOpts{.step = 1e-4});
  CHECK(max_abs(tail.back().x - fine.back().x) <= 1e-8);

  const auto last = restart(s, whole, v, 1.0);
  CHECK(last.samples.size() == 1);
  CHECK(last.back().x == whole.back().x);

  const auto flat = catalog::euclidean(2);
  const auto fv = TangentCurve::expressions(Vec::Zero(2), exprs({"cos(t)", "t"}), 1.0);
  CHECK(max_abs(restart(flat, develop(flat, fv), fv, 0.5).back().x - develop(flat, fv).back().x) <= 1e-12);

  CHECK_THROWS_AS(restart(s, whole, v, 1.5), InvalidArgument);
}

TEST_CASE("parallel transport") {
  const auto e2 = catalog::euclidean(2);
  const auto loop = ChartPath::expressions(exprs({"cos(t)", "sin(t)"}), 0.0, 2.0 * pi);
  CHECK(max_abs(transport_along(e2, loop).back().frame - Mat::Identity(2, 2)) <= 1e-12);

  const auto t2 = catalog::flat_torus(2);
  CHECK(max_abs(transport_along(t2, ChartPath::expressions(exprs({"0.5 + 0.3*cos(t)", "0.5 + 0.2*sin(3*t)"}), 0.0,
                                                           2.0 * pi))
                    .back()
                    .frame -
                Mat::Identity(2, 2)) <= 1e-9);

  // octant triangle: pole -> (1,0) -> (0,1) -> pole, three right angles
  const auto s = catalog::sphere_stereo(1.0);
  const auto leg1 = ChartPath::expressions(exprs({"t", "0"}), 0.0, 1.0);
  const auto leg2 = ChartPath::expressions(exprs({"cos(t)", "sin(t)"}), 0.0, pi / 2.0);
  const auto leg3 = ChartPath::expressions(exprs({"0", "1 - t"}), 0.0, 1.0);
  const Mat hol = transport_along(s, leg3).back().frame.transpose() * transport_along(s, leg2).back().frame.transpose() *
                  transport_along(s, leg1).back().frame.transpose();
  CHECK(max_abs(hol.transpose() * hol - Mat::Identity(2, 2)) <= 1e-4);
  CHECK(std::abs(std::abs(std::atan2(hol(1, 0), hol(0, 0))) - pi / 2.0) <= 1e-4);

  // linearity, isometry and reversal
  const auto path = ChartPath::expressions(exprs({"0.2 + 0.5*t", "sin(t)"}), 0.0, 1.5);
  const auto back = ChartPath::expressions(exprs({"0.2 + 0.5*(1.5 - t)", "sin(1.5 - t)"}), 0.0, 1.5);
  const Vec a{{0.3, -1.0}}, b{{2.0, 0.4}};
  const Vec ta = parallel_transport(s, path, a), tb = parallel_transport(s, path, b);
  CHECK(max_abs(parallel_transport(s, path, Vec(2.0 * a - b)) - (2.0 * ta - tb)) <= 1e-12);
  const Vec q = path.position(1.5);
  CHECK(std::abs(s.inner(q, ta, tb) - s.inner(Vec{{0.2, 0.0}}, a, b)) <= 1e-7);
  CHECK(max_abs(parallel_transport(s, back, ta) - a) <= 1e-7);

  // sampled path through the cubic Hermite interpolant
  std::vector<double> times;
  std::vector<ChartPoint> pts;
  for (int k = 0; k <= 200; ++k) {
    const double t = 1.5 * k / 200.0;
    times.push_back(t);
    pts.push_back(path.position(t));
  }
  CHECK(max_abs(parallel_transport(s, ChartPath::samples(times, pts), a) - ta) <= 1e-5);
}

TEST_CASE("integrator options") {
  const auto s = catalog::sphere_stereo(1.0);
  const Vec p{{0.3, -0.2}}, v{{0.4, 0.9}};
  const auto ref = geodesic(s, p, v, 2.0);
  IntegratorOpts adaptive;
  adaptive.method = Method::rkf45;
  adaptive.tolerance = 1e-12;
  const auto r = geodesic(s, p, v, 2.0, adaptive);
  CHECK(r.completed());
  CHECK(max_abs(r.back().x - ref.back().x) <= 1e-8);

  IntegratorOpts capped;
  capped.max_steps = 10;
  CHECK(geodesic(s, p, v, 2.0, capped).status == StopReason::max_steps);

  IntegratorOpts strided;
  strided.sample_stride = 100;
  const auto st = geodesic(s, p, v, 2.0, strided);
  CHECK(st.samples.size() == 21);
  CHECK(st.back().x == ref.back().x);

  CHECK_THROWS_AS(geodesic(s, p, v, 2.0, IntegratorOpts{.step = 0.0}), InvalidArgument);
}
